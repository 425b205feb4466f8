use std::path::Path;

use ca_consensus::analysis::{build_stg, classify_states, stg_to_csv, stg_to_dot, adversarial_flip_search, Verdict};
use ca_consensus::ca2d::{evolve2d, random_config2d, spacetime_slice, Config2D, Rule2D};
use ca_consensus::graph::{graph_family_success_rate, graph_stg, graph_success_rate, NodeGraph, ShellRule, SuccessRate};
use ca_consensus::io::{config_csv, grid_csv, history_pgm, pgm_bytes};
use ca_consensus::multiway::{multiway_async_block, multiway_async_ca, multiway_noise, MultiwayGraph};
use ca_consensus::rule::{evolve, random_config, Config1D, Rule1D};
use ca_consensus::rulespec::RuleSpec;
use ca_consensus::search::{
    candidate_count, estimate_seconds, search_rules, CheckpointFiles, Metric, RuleSource, ScoreSpec, SearchOptions,
};
use ca_consensus::seed;
use ca_consensus::stochastic::{
    async_final_density_curve, evolve_async, evolve_block_async, evolve_noisy, phase_diagram, PairBoundary,
};
use serde_json::{json, Value};

use crate::output::Outputs;
use crate::{
    AttackArgs, BoundaryArg, GraphArgs, MetricArg, MultiwayArgs, MultiwayMode, PhaseArgs, RegimeArg, ScheduleArg,
    SearchArgs, SimulateArgs, StgArgs,
};

type CliResult<T = ()> = Result<T, Box<dyn std::error::Error>>;

fn flag<E: std::fmt::Display>(name: &'static str) -> impl FnOnce(E) -> String {
    move |e| format!("--{name}: {e}")
}

fn parse_rule(s: &str) -> CliResult<RuleSpec> {
    Ok(s.parse::<RuleSpec>().map_err(flag("rule"))?)
}

fn one_d(s: &str) -> CliResult<Rule1D> {
    Ok(parse_rule(s)?.one_d().map_err(flag("rule"))?)
}

fn check_p(name: &'static str, p: f64) -> CliResult {
    if !(0.0..=1.0).contains(&p) {
        return Err(format!("--{name}: {p} is outside [0, 1]").into());
    }
    Ok(())
}

fn params<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

fn parse_size(s: &str) -> CliResult<(usize, usize)> {
    let (h, w) = s.split_once(['x', 'X']).ok_or_else(|| format!("--size: expected HxW, got {s:?}"))?;
    let h: usize = h.parse().map_err(flag("size"))?;
    let w: usize = w.parse().map_err(flag("size"))?;
    if h == 0 || w == 0 {
        return Err(format!("--size: {s} has no cells").into());
    }
    Ok((h, w))
}

fn grid_rows(g: &Config2D) -> Vec<Vec<u8>> {
    (0..g.height()).map(|y| g.row(y).to_vec()).collect()
}

pub fn simulate(out: &Path, a: &SimulateArgs) -> CliResult {
    let spec = parse_rule(&a.rule)?;
    check_p("noise", a.noise)?;
    if let Some(p) = a.p {
        check_p("p", p)?;
    }
    let p = a.p.unwrap_or(0.5);
    let mut files = Outputs::new(out)?;
    let results = match spec {
        RuleSpec::TwoD(rule) => {
            let size = a.size.as_deref().ok_or("--size: required for 2D rules")?;
            let (h, w) = parse_size(size)?;
            if a.schedule != ScheduleArg::Sync || a.noise > 0.0 {
                return Err("--schedule/--noise: 2D rules run synchronously without noise".into());
            }
            simulate_2d(&mut files, &rule, h, w, p, a)?
        }
        RuleSpec::OneD(rule) => {
            let init = initial_1d(a, p)?;
            let dyn_seed = seed::derive(a.seed, 1);
            let history = match a.schedule {
                ScheduleArg::Sync => evolve_noisy(&init, &rule, a.noise, a.steps, dyn_seed).map_err(flag("noise"))?,
                ScheduleArg::Async => {
                    if a.noise > 0.0 {
                        return Err("--noise: only the synchronous schedule takes noise".into());
                    }
                    let upr = a.updates_per_row.unwrap_or(2 * init.len());
                    evolve_async(&init, &rule, upr, a.steps, dyn_seed).map_err(flag("updates-per-row"))?.rows
                }
            };
            finish_1d(&mut files, &init, &history)?
        }
        RuleSpec::Block(rule) => {
            let init = initial_1d(a, p)?;
            let boundary = match a.boundary {
                BoundaryArg::Line => PairBoundary::Line,
                BoundaryArg::Cycle => PairBoundary::Cycle,
            };
            let history = evolve_block_async(&init, &rule, boundary, a.steps, seed::derive(a.seed, 1)).map_err(flag("n"))?;
            finish_1d(&mut files, &init, &history)?
        }
        RuleSpec::Shell(_) => return Err("--rule: shell rules act on graphs; use the graph subcommand".into()),
    };
    files.finish("simulate", params(a), Some(a.seed), results)?;
    Ok(())
}

fn initial_1d(a: &SimulateArgs, p: f64) -> CliResult<Config1D> {
    if a.size.is_some() {
        return Err("--size: only 2D rules take a grid size".into());
    }
    match (&a.init, a.n) {
        (Some(s), None) => Ok(Config1D::parse(s).map_err(flag("init"))?),
        (Some(s), Some(n)) => {
            let c = Config1D::parse(s).map_err(flag("init"))?;
            if c.len() != n {
                return Err(format!("--n: {n} does not match --init length {}", c.len()).into());
            }
            Ok(c)
        }
        (None, Some(n)) => Ok(random_config(n, p, seed::derive(a.seed, 0)).map_err(flag("n"))?),
        (None, None) => Err("--n: required unless --init is given".into()),
    }
}

fn finish_1d(files: &mut Outputs, init: &Config1D, history: &[Config1D]) -> CliResult<Value> {
    let last = history.last().expect("history includes the initial row");
    files.write("spacetime.pgm", history_pgm(history)?)?;
    files.write("final.csv", config_csv(last))?;
    let majority = init.majority();
    let uniform = last.consensus_state().value();
    Ok(json!({
        "rows": history.len(),
        "initial_density": init.density_f64(),
        "final_density": last.density_f64(),
        "initial_majority": majority,
        "final_uniform": uniform,
        "consensus_reached": majority.is_some() && uniform == majority,
    }))
}

fn simulate_2d(files: &mut Outputs, rule: &Rule2D, h: usize, w: usize, p: f64, a: &SimulateArgs) -> CliResult<Value> {
    let init = random_config2d(h, w, p, seed::derive(a.seed, 0)).map_err(flag("p"))?;
    let history = evolve2d(&init, rule, a.steps);
    let last = history.last().expect("history includes the initial grid");
    files.write("initial.pgm", pgm_bytes(&grid_rows(&init))?)?;
    files.write("final.pgm", pgm_bytes(&grid_rows(last))?)?;
    files.write("final.csv", grid_csv(&grid_rows(last)))?;
    if let Some(row) = a.slice {
        let slice = spacetime_slice(&history, row).map_err(flag("slice"))?;
        files.write("slice.pgm", pgm_bytes(&slice)?)?;
        files.write("slice.csv", grid_csv(&slice))?;
    }
    let fixed = history.len() >= 2 && history[history.len() - 2] == *last;
    Ok(json!({
        "rows": history.len(),
        "initial_density": init.density(),
        "final_density": last.density(),
        "final_uniform": last.uniform_value(),
        "fixed_point": fixed,
    }))
}

pub fn stg(out: &Path, a: &StgArgs) -> CliResult {
    let rule = one_d(&a.rule)?;
    let stg = build_stg(&rule, a.n).map_err(flag("n"))?;
    let report = classify_states(&stg);
    let mut files = Outputs::new(out)?;
    files.write("stg.csv", stg_to_csv(&stg, &report))?;
    if a.n <= a.dot_limit {
        files.write("stg.dot", stg_to_dot(&stg))?;
    } else {
        log::warn!("skipping stg.dot: {} cells exceeds --dot-limit {}", a.n, a.dot_limit);
    }
    let mut margins: Vec<(u32, u32)> = (0..stg.state_count() as u32)
        .filter(|&s| report.verdict(s) == Verdict::Wrong)
        .map(|s| {
            let ones = s.count_ones();
            let zeros = a.n as u32 - ones;
            (ones.max(zeros), ones.min(zeros))
        })
        .collect();
    margins.sort_unstable();
    margins.dedup();
    let c = report.counts;
    let summary = json!({
        "rule": rule.label(),
        "n": a.n,
        "correct": c.correct,
        "wrong": c.wrong,
        "stuck": c.stuck,
        "tie": c.tie,
        "attractors": stg.attractors().len(),
        "wrong_margins": margins.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>(),
        "wrong_examples": report.wrong_states.iter().map(|&s| Config1D::from_state(s.into(), a.n).to_string()).collect::<Vec<_>>(),
        "stuck_examples": report.stuck_states.iter().map(|&s| Config1D::from_state(s.into(), a.n).to_string()).collect::<Vec<_>>(),
    });
    files.write("report.json", serde_json::to_string_pretty(&summary)? + "\n")?;
    println!("wrong={} stuck={} correct={} tie={}", c.wrong, c.stuck, c.correct, c.tie);
    files.finish("stg", params(a), None, summary)?;
    Ok(())
}

pub fn phase(out: &Path, a: &PhaseArgs) -> CliResult {
    let rule = one_d(&a.rule)?;
    for &p in &a.p {
        check_p("p", p)?;
    }
    for &q in &a.q {
        check_p("q", q)?;
    }
    let mut files = Outputs::new(out)?;
    let mut csv;
    match a.schedule {
        ScheduleArg::Sync => {
            let d = phase_diagram(&rule, a.n, a.steps, &a.p, &a.q, a.trials, a.seed)?;
            csv = String::from("p,q,mean_final_density\n");
            for (i, p) in d.p_grid.iter().enumerate() {
                for (j, q) in d.q_grid.iter().enumerate() {
                    csv.push_str(&format!("{p},{q},{}\n", d.mean[i][j]));
                }
            }
            files.write("phase.csv", &csv)?;
        }
        ScheduleArg::Async => {
            if a.q.iter().any(|&q| q != 0.0) {
                return Err("--q: the asynchronous schedule takes no noise".into());
            }
            let upr = a.updates_per_row.unwrap_or(2 * a.n);
            let curve = async_final_density_curve(&rule, a.n, a.steps, upr, &a.p, a.trials, a.seed)?;
            csv = String::from("p,mean_final_density,std_err\n");
            for pt in &curve {
                csv.push_str(&format!("{},{},{}\n", pt.p, pt.mean, pt.std_err));
            }
            files.write("curve.csv", &csv)?;
        }
    }
    files.finish("phase", params(a), Some(a.seed), Value::Null)?;
    Ok(())
}

fn score_spec(a: &SearchArgs) -> CliResult<ScoreSpec> {
    let mut spec = match a.regime {
        RegimeArg::Sync => ScoreSpec::sync(a.n, a.steps, a.trials, a.seed),
        RegimeArg::Async => {
            let mut s = ScoreSpec::asynchronous(a.n, a.steps, a.trials, a.seed);
            if let Some(u) = a.updates_per_row {
                s.regime = ca_consensus::search::Regime::Async { updates_per_row: u };
            }
            s
        }
        RegimeArg::Noisy => ScoreSpec::noisy(a.n, a.steps, a.q, a.trials, a.seed),
    };
    if !a.p.is_empty() {
        spec = spec.with_p_values(a.p.clone());
    }
    if let Some(m) = a.metric {
        spec = spec.with_metric(match m {
            MetricArg::Exact => Metric::ExactConsensus,
            MetricArg::Agree => Metric::MajorityAgreement,
        });
    }
    spec.validate()?;
    Ok(spec)
}

pub fn search(out: &Path, a: &SearchArgs) -> CliResult {
    if a.radius > 2 {
        return Err(format!("--radius: {} is not searchable (at most 2)", a.radius).into());
    }
    let spec = score_spec(a)?;
    let space = 1u64 << (1u32 << (2 * a.radius + 1));
    let mut sources = Vec::new();
    if a.exhaustive {
        sources.push(RuleSource::Range { start: 0, end: space });
    }
    if let Some(r) = &a.range {
        let (s, e) = r.split_once("..").ok_or_else(|| format!("--range: expected START..END, got {r:?}"))?;
        let (start, end): (u64, u64) = (s.parse().map_err(flag("range"))?, e.parse().map_err(flag("range"))?);
        if start > end || end > space {
            return Err(format!("--range: {r} is not inside 0..{space}").into());
        }
        sources.push(RuleSource::Range { start, end });
    }
    if let Some(count) = a.sample {
        sources.push(RuleSource::Sample { count, seed: seed::derive(a.seed, 1) });
    }
    if !a.rules.is_empty() {
        if let Some(bad) = a.rules.iter().find(|&&r| r >= space) {
            return Err(format!("--rules: {bad} is outside the radius-{} rule space", a.radius).into());
        }
        sources.push(RuleSource::List(a.rules.clone()));
    }
    let total = candidate_count(&sources);
    if total == 0 {
        return Err("--sample/--range/--rules/--exhaustive: no candidates to score".into());
    }
    let estimate = estimate_seconds(&spec, a.radius, total)?;
    if a.exhaustive {
        eprintln!("exhaustive search over {total} rules: estimated {estimate:.0} s on this machine");
        if !a.yes {
            return Err("--exhaustive: rerun with --yes to start".into());
        }
    } else {
        log::info!("{total} candidates, estimated {estimate:.1} s");
    }
    if a.checkpoint_every == 0 {
        return Err("--checkpoint-every: must be at least 1".into());
    }
    let mut files = Outputs::new(out)?;
    let mut cp = CheckpointFiles::in_dir(out);
    cp.every = a.checkpoint_every;
    let options = SearchOptions { radius: a.radius, top_k: a.top, symmetric_only: a.symmetric };
    let top = search_rules(&sources, &spec, &options, Some(&cp))?;
    let mut csv = String::from("rank,rule,metric_exact,metric_agree,trials,spec_hash\n");
    for (i, r) in top.iter().enumerate() {
        let rule = r.rule.map_or_else(|| r.label.clone(), |n| n.to_string());
        csv.push_str(&format!("{},{rule},{},{},{},{}\n", i + 1, r.metric_exact, r.metric_agree, r.trials, r.spec_hash));
    }
    files.write("spec.json", serde_json::to_string_pretty(&spec)? + "\n")?;
    files.write("top.csv", csv)?;
    files.track(cp.results.clone());
    files.track(cp.checkpoint.clone());
    let results = json!({ "candidates": total, "spec_hash": spec.hash(), "best": top.first().and_then(|r| r.rule) });
    files.finish("search", params(a), Some(a.seed), results)?;
    Ok(())
}

fn build_graph(spec: &str, seed: u64) -> CliResult<NodeGraph> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| format!("--graph: expected KIND:ARGS, got {spec:?}"))?;
    let num = |s: &str| s.parse::<usize>().map_err(flag("graph"));
    let g = match kind {
        "ring" => NodeGraph::ring(num(rest)?)?,
        "path" => NodeGraph::path(num(rest)?),
        "complete" => NodeGraph::complete(num(rest)?),
        "lattice" => {
            let (size, open) = match rest.strip_suffix(":open") {
                Some(s) => (s, true),
                None => (rest, false),
            };
            let (h, w) = parse_size(size).map_err(flag("graph"))?;
            NodeGraph::lattice(h, w, !open)?
        }
        "regular" | "gnm" => {
            let (n, k) = rest.split_once(':').ok_or_else(|| format!("--graph: expected {kind}:N:K, got {spec:?}"))?;
            if kind == "regular" {
                NodeGraph::random_regular(num(n)?, num(k)?, seed)?
            } else {
                NodeGraph::gnm(num(n)?, num(k)?, seed)?
            }
        }
        "file" => {
            let text = std::fs::read_to_string(rest).map_err(|e| format!("--graph: {rest}: {e}"))?;
            if text.trim_start().starts_with("graph") {
                NodeGraph::from_dot(&text)?
            } else {
                NodeGraph::from_edge_list(&text)?
            }
        }
        other => return Err(format!("--graph: unknown graph kind {other:?}").into()),
    };
    Ok(g)
}

fn rate_json(r: &SuccessRate) -> Value {
    json!({ "successes": r.successes, "counted": r.counted, "ties_excluded": r.ties_excluded, "rate": r.rate() })
}

pub fn graph(out: &Path, a: &GraphArgs) -> CliResult {
    let rule: ShellRule = match parse_rule(&a.rule)? {
        RuleSpec::Shell(r) => r,
        _ => return Err("--rule: the graph subcommand takes a shell:<R> rule".into()),
    };
    check_p("p", a.p)?;
    let random_kind = a.graph.starts_with("regular:") || a.graph.starts_with("gnm:");
    if a.family && !random_kind {
        return Err("--family: only random graph kinds (regular, gnm) have a family".into());
    }
    let g = build_graph(&a.graph, seed::derive(a.seed, 2))?;
    let mut files = Outputs::new(out)?;
    files.write("graph.dot", g.to_dot(None))?;
    files.write("graph.edges", g.to_edge_list())?;
    let rate = if a.family {
        let spec = a.graph.clone();
        graph_family_success_rate(
            |s| build_graph(&spec, s).map_err(|e| ca_consensus::Error::Parse(e.to_string())),
            &rule,
            a.trials,
            a.p,
            a.seed,
        )?
    } else {
        graph_success_rate(&g, &rule, a.trials, a.p, a.seed)?
    };
    let mut results = json!({ "nodes": g.node_count(), "edges": g.edges().len(), "success": rate_json(&rate) });
    if a.compare_ring {
        let ring = graph_success_rate(&NodeGraph::ring(g.node_count())?, &rule, a.trials, a.p, a.seed)?;
        results["ring_success"] = rate_json(&ring);
    }
    if a.stg {
        let stg = graph_stg(&g, &rule).map_err(flag("stg"))?;
        let report = classify_states(&stg);
        files.write("stg.csv", stg_to_csv(&stg, &report))?;
        let c = report.counts;
        results["stg"] = json!({ "correct": c.correct, "wrong": c.wrong, "stuck": c.stuck, "tie": c.tie });
    }
    let mut csv = String::from("graph,successes,counted,ties_excluded,rate\n");
    csv.push_str(&format!("{},{},{},{},{}\n", a.graph, rate.successes, rate.counted, rate.ties_excluded, rate.rate()));
    if let Some(r) = results.get("ring_success") {
        csv.push_str(&format!(
            "ring:{},{},{},{},{}\n",
            g.node_count(),
            r["successes"],
            r["counted"],
            r["ties_excluded"],
            r["rate"]
        ));
    }
    files.write("success.csv", csv)?;
    files.finish("graph", params(a), Some(a.seed), results)?;
    Ok(())
}

pub fn multiway(out: &Path, a: &MultiwayArgs) -> CliResult {
    let init = Config1D::parse(&a.init).map_err(flag("init"))?;
    let g: MultiwayGraph = match (&a.rule, &a.block) {
        (None, Some(b)) => match parse_rule(b).map_err(|e| e.to_string().replace("--rule", "--block"))? {
            RuleSpec::Block(rule) => multiway_async_block(&rule, &init).map_err(flag("init"))?,
            _ => return Err("--block: expected a block rule such as sort".into()),
        },
        (Some(r), None) => {
            let rule = one_d(r)?;
            match a.mode {
                MultiwayMode::Noise => {
                    multiway_noise(&rule, &init, a.generations.unwrap_or(3), a.max_nodes).map_err(flag("init"))?
                }
                MultiwayMode::Async => multiway_async_ca(&rule, &init, a.generations, a.max_nodes).map_err(flag("init"))?,
            }
        }
        _ => return Err("--rule/--block: give exactly one".into()),
    };
    let mut files = Outputs::new(out)?;
    files.write("multiway.dot", g.to_dot())?;
    files.write("multiway_edges.csv", g.edges_csv())?;
    let terminals: Vec<String> = g.terminal_states().iter().map(|&s| g.state_label(s)).collect();
    let results = json!({
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "terminal_states": terminals,
        "truncated": g.truncated(),
    });
    println!("nodes={} edges={} terminal={}", g.node_count(), g.edge_count(), terminals.join(","));
    files.finish("multiway", params(a), None, results)?;
    Ok(())
}

pub fn attack(out: &Path, a: &AttackArgs) -> CliResult {
    let rule = one_d(&a.rule)?;
    check_p("p", a.p)?;
    let config = match (&a.init, a.n) {
        (Some(s), _) => Config1D::parse(s).map_err(flag("init"))?,
        (None, Some(n)) => random_config(n, a.p, seed::derive(a.seed, 0)).map_err(flag("n"))?,
        (None, None) => return Err("--n: required unless --init is given".into()),
    };
    let r = adversarial_flip_search(&rule, &config, a.max_flips, a.steps).map_err(flag("max-flips"))?;
    let mut files = Outputs::new(out)?;
    let results = json!({
        "initial": config.to_string(),
        "baseline": r.baseline,
        "flips": r.flips,
        "attacked": r.attacked,
        "subsets_tried": r.subsets_tried,
    });
    files.write("attack.json", serde_json::to_string_pretty(&results)? + "\n")?;
    if let Some(flips) = &r.flips {
        let mut c = config.clone();
        for &i in flips {
            c.flip(i);
        }
        files.write("baseline.pgm", history_pgm(&evolve(&config, &rule, a.steps))?)?;
        files.write("attacked.pgm", history_pgm(&evolve(&c, &rule, a.steps))?)?;
    }
    files.finish("attack", params(a), Some(a.seed), results)?;
    Ok(())
}

//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ca_consensus::analysis::{build_stg, canonical_rotation, classify_states, consensus_time_stats, no_perfect_rule_check, rotate_state, Verdict};
use ca_consensus::ca2d::{make_sampled_majority2d, make_totalistic2d, random_config2d, run2d, Neighborhood, Outcome2D, Rule2D, NORTH_EAST_CENTER};
use ca_consensus::graph::{graph_family_success_rate, graph_success_rate, NodeGraph, ShellRule};
use ca_consensus::multiway::multiway_async_block;
use ca_consensus::rule::{gkl, make_elementary_rule, make_radius_rule, random_config, Config1D};
use ca_consensus::search::{score_rule, Metric, ScoreSpec};
use ca_consensus::seed;
use ca_consensus::stochastic::{async_final_density_curve, final_density_curve, run_block_to_terminal, BlockRule, PairBoundary};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn patterns(k: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1usize << k).map(move |v| (0..k).map(|j| ((v >> j) & 1) as u8).collect())
}

fn c1_rule_tables() -> Check {
    let e232 = make_elementary_rule(232).map_err(|e| e.to_string())?;
    let maj = |p: &[u8]| u8::from(2 * p.iter().map(|&v| v as usize).sum::<usize>() > p.len());
    let bad3 = patterns(3).filter(|p| e232.apply(p) != maj(p)).count();
    let vn = make_totalistic2d(Neighborhood::VonNeumann5, 56).map_err(|e| e.to_string())?;
    let bad5 = patterns(5).filter(|p| vn.eval(p) != maj(p)).count();
    let moore = make_totalistic2d(Neighborhood::Moore9, 976).map_err(|e| e.to_string())?;
    let mut differing: Vec<usize> = patterns(9)
        .filter(|p| moore.eval(p) != maj(p))
        .map(|p| p.iter().map(|&v| v as usize).sum())
        .collect();
    differing.sort_unstable();
    differing.dedup();
    ensure(
        bad3 == 0 && bad5 == 0 && differing == [4, 5],
        format!("e232 mismatches={bad3}, t56 mismatches={bad5}, t976 differs at totals {differing:?}"),
    )
}

fn c2_gkl_consensus() -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for (i, p) in [0.4, 0.6].into_iter().enumerate() {
        let s = consensus_time_stats(&gkl(), 99, p, 100, 300, seed::derive(2, i as u64)).map_err(|e| e.to_string())?;
        let correct = s.times.len() - s.wrong;
        ok &= correct >= 95;
        detail.push(format!("p={p}: {correct}/100 correct"));
    }
    ensure(ok, detail.join(", "))
}

fn c3_sharp_transition() -> Check {
    let ps = [0.3, 0.35, 0.4, 0.45, 0.55, 0.6, 0.65, 0.7];
    let curve = final_density_curve(&gkl(), 199, 400, &ps, 50, 3).map_err(|e| e.to_string())?;
    let ok = curve.iter().all(|&(p, d)| if p < 0.5 { d <= 0.05 } else { d >= 0.95 });
    let pts: Vec<String> = curve.iter().map(|(p, d)| format!("{p}:{d:.3}")).collect();
    ensure(ok, pts.join(" "))
}

fn c4_finite_size() -> Check {
    let report = |n| build_stg(&gkl(), n).map(|s| (classify_states(&s), s)).map_err(|e| e.to_string());
    let (r5, _) = report(5)?;
    let (r7, _) = report(7)?;
    let (r11, _) = report(11)?;
    let stuck7: Vec<u32> = (0..128).filter(|&s| r7.verdict(s) == Verdict::Stuck).collect();
    let closed = stuck7.iter().all(|&s| (0..7).all(|j| r7.verdict(rotate_state(s, 7, j)) == Verdict::Stuck));
    let families = stuck7.iter().map(|&s| canonical_rotation(s, 7)).collect::<std::collections::BTreeSet<_>>().len();
    let margins_ok = (0..1u32 << 11)
        .filter(|&s| r11.verdict(s) == Verdict::Wrong)
        .all(|s| matches!(s.count_ones(), 5 | 6));
    let ok = r5.counts.correct == 32
        && r5.is_perfect()
        && r7.counts.stuck == 14
        && closed
        && r11.counts.wrong == 22
        && margins_ok;
    ensure(
        ok,
        format!(
            "n=5 correct={} | n=7 stuck={} in {families} rotation families | n=11 wrong={} all 6-5={margins_ok}",
            r5.counts.correct, r7.counts.stuck, r11.counts.wrong
        ),
    )
}

fn c5_impossibility() -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [5, 7] {
        let ev = no_perfect_rule_check(n).map_err(|e| e.to_string())?;
        let imperfect = ev.iter().filter(|e| e.counterexample.is_some()).count();
        ok &= ev.len() == 256 && imperfect == 256;
        detail.push(format!("n={n}: {imperfect}/256 imperfect"));
    }
    ensure(ok, detail.join(", "))
}

fn c6_noise_ordering() -> Check {
    let rate = |q: f64| {
        let spec = ScoreSpec::noisy(199, 400, q, 50, 6).with_p_values(vec![0.6]);
        score_rule(&gkl(), &spec).map(|r| r.metric_exact).map_err(|e| e.to_string())
    };
    let (r0, r_low, r_high) = (rate(0.0)?, rate(0.005)?, rate(0.1)?);
    ensure(
        r_low - r_high >= 0.3 && r0 >= r_low,
        format!("rate q=0: {r0:.2}, q=0.005: {r_low:.2}, q=0.1: {r_high:.2}"),
    )
}

fn c7_async_gkl() -> Check {
    let sync = ScoreSpec::sync(100, 200, 50, 7).with_p_values(vec![0.6]);
    let asy = ScoreSpec::asynchronous(100, 200, 50, 7).with_p_values(vec![0.6]).with_metric(Metric::ExactConsensus);
    let rs = score_rule(&gkl(), &sync).map_err(|e| e.to_string())?.metric_exact;
    let ra = score_rule(&gkl(), &asy).map_err(|e| e.to_string())?.metric_exact;
    ensure(ra <= 0.5 && rs - ra >= 0.4, format!("sync={rs:.2} async={ra:.2}"))
}

fn sorted(c: &Config1D) -> String {
    let ones = c.ones_count();
    format!("{}{}", "0".repeat(c.len() - ones), "1".repeat(ones))
}

fn c8_sorting() -> Check {
    let sort = BlockRule::sort();
    let mut checked = 0usize;
    for n in 1..=10usize {
        for s in 0..1u64 << n {
            let c = Config1D::from_state(s, n);
            let g = multiway_async_block(&sort, &c).map_err(|e| e.to_string())?;
            let t = g.terminal_states();
            if t.len() != 1 || g.state_label(t[0]) != sorted(&c) {
                return Err(format!("{c}: terminals {t:?}"));
            }
            checked += 1;
        }
    }
    for t in 0..100u64 {
        let c = random_config(50, 0.5, seed::derive(8, t)).map_err(|e| e.to_string())?;
        let r = run_block_to_terminal(&c, &sort, PairBoundary::Line, 10_000_000, seed::derive(9, t)).map_err(|e| e.to_string())?;
        if r.terminal.to_string() != sorted(&c) {
            return Err(format!("random run {t} ended at {}", r.terminal));
        }
    }
    Ok(format!("{checked} line configurations n<=10 confluent, 100/100 random n=50 runs sorted"))
}

fn c9_2d_contrast() -> Check {
    let count = |rule: &Rule2D, want: fn(&Outcome2D) -> bool| -> Result<usize, String> {
        let mut k = 0;
        for i in 0..10u64 {
            let init = random_config2d(64, 64, 0.3, seed::derive(10, i)).map_err(|e| e.to_string())?;
            k += usize::from(want(&run2d(&init, rule, 1000).0));
        }
        Ok(k)
    };
    let stuck = |o: &Outcome2D| matches!(o, Outcome2D::StuckFixed { .. });
    let zero = |o: &Outcome2D| matches!(o, Outcome2D::Uniform { value: 0, .. });
    let t56 = make_totalistic2d(Neighborhood::VonNeumann5, 56).map_err(|e| e.to_string())?;
    let t976 = make_totalistic2d(Neighborhood::Moore9, 976).map_err(|e| e.to_string())?;
    let nec = make_sampled_majority2d(&NORTH_EAST_CENTER).map_err(|e| e.to_string())?;
    let (a, b, c) = (count(&t56, stuck)?, count(&t976, zero)?, count(&nec, zero)?);
    ensure(
        a >= 8 && b >= 9 && c >= 9,
        format!("code 56 stuck {a}/10, code 976 all-0 {b}/10, north-east-center majority all-0 {c}/10"),
    )
}

fn c10_graph_vs_ring() -> Check {
    let rule = ShellRule::majority(1).map_err(|e| e.to_string())?;
    let ring = graph_success_rate(&NodeGraph::ring(30).map_err(|e| e.to_string())?, &rule, 200, 0.7, 11)
        .map_err(|e| e.to_string())?;
    let reg = graph_family_success_rate(|s| NodeGraph::random_regular(30, 4, s), &rule, 200, 0.7, 11)
        .map_err(|e| e.to_string())?;
    ensure(
        reg.rate() > ring.rate(),
        format!("4-regular {:.3} ({}/{}) vs ring {:.3} ({}/{})", reg.rate(), reg.successes, reg.counted, ring.rate(), ring.successes, ring.counted),
    )
}

fn c11_named_async_rules() -> Check {
    let ps: Vec<f64> = (0..9).map(|i| 0.3 + 0.05 * i as f64).filter(|p| (p - 0.5).abs() > 1e-9).collect();
    let mut detail = Vec::new();
    let mut ok = true;
    for number in [4_272_826_020u128, 4_242_057_736, 4_265_795_970] {
        let rule = make_radius_rule(2, number).map_err(|e| e.to_string())?;
        let curve = async_final_density_curve(&rule, 100, 200, 200, &ps, 100, seed::derive(12, number as u64))
            .map_err(|e| e.to_string())?;
        let monotone = curve.windows(2).all(|w| w[1].mean + 2.0 * (w[0].std_err.hypot(w[1].std_err)) >= w[0].mean);
        let (first, last) = (curve[0].mean, curve[curve.len() - 1].mean);
        ok &= monotone && first < 0.5 && last > 0.5;
        detail.push(format!("{number}: {first:.2}->{last:.2} monotone={monotone}"));
    }
    ensure(ok, detail.join(", "))
}

fn files_in(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .map(|it| {
            it.filter_map(|e| e.ok())
                .filter(|e| e.file_name() != "manifest.json")
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default()
}

fn c12_determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_ca-consensus");
    let matrix: &[&[&str]] = &[
        &["simulate", "--rule", "gkl", "--n", "149", "--p", "0.6", "--steps", "149", "--seed", "7"],
        &["simulate", "--rule", "gkl", "--n", "80", "--p", "0.6", "--steps", "40", "--noise", "0.02", "--seed", "3"],
        &["simulate", "--rule", "e232", "--n", "60", "--steps", "20", "--schedule", "async", "--seed", "4"],
        &["simulate", "--rule", "sort", "--n", "30", "--steps", "50", "--seed", "4"],
        &["simulate", "--rule", "t2d:moore9:976", "--size", "40x40", "--p", "0.3", "--steps", "60", "--slice", "5", "--seed", "1"],
        &["stg", "--rule", "gkl", "--n", "9"],
        &["phase", "--rule", "gkl", "--n", "59", "--steps", "60", "--p", "0.4,0.6", "--q", "0,0.05", "--trials", "6", "--seed", "2"],
        &["phase", "--rule", "r2:4272826020", "--n", "40", "--steps", "20", "--schedule", "async", "--p", "0.3,0.7", "--trials", "6", "--seed", "2"],
        &["search", "--sample", "40", "--rules", "4272826020", "--n", "29", "--steps", "30", "--trials", "8", "--checkpoint-every", "7", "--seed", "5"],
        &["search", "--sample", "20", "--regime", "async", "--n", "21", "--steps", "10", "--trials", "6", "--seed", "5"],
        &["graph", "--graph", "regular:30:4", "--family", "--compare-ring", "--p", "0.7", "--trials", "40", "--seed", "9"],
        &["graph", "--graph", "gnm:12:20", "--stg", "--trials", "20", "--seed", "9"],
        &["multiway", "--block", "sort", "--init", "1010"],
        &["multiway", "--rule", "e232", "--init", "0101", "--mode", "noise", "--generations", "2"],
        &["attack", "--rule", "gkl", "--n", "49", "--p", "0.55", "--max-flips", "2", "--seed", "1"],
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (i, args) in matrix.iter().enumerate() {
        let mut outputs = Vec::new();
        for (run, threads) in ["1", "4", "4"].iter().enumerate() {
            let dir = tmp.path().join(format!("{i}-{run}"));
            let status = Command::new(bin)
                .args(*args)
                .args(["--quiet", "--threads", threads, "--out"])
                .arg(&dir)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!("{}: {}", args.join(" "), String::from_utf8_lossy(&status.stderr).trim()));
            }
            outputs.push(files_in(&dir));
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] || outputs[1] != outputs[2] {
            return Err(format!("{} differs between runs", args.join(" ")));
        }
    }
    Ok(format!("{} invocations byte-identical across reruns and thread counts", matrix.len()))
}

fn main() {
    let checks: [Criterion; 12] = [
        ("rule-table fidelity", c1_rule_tables),
        ("GKL deterministic consensus", c2_gkl_consensus),
        ("GKL sharp transition", c3_sharp_transition),
        ("finite-size exactness", c4_finite_size),
        ("impossibility evidence", c5_impossibility),
        ("noise robustness ordering", c6_noise_ordering),
        ("asynchrony destroys GKL", c7_async_gkl),
        ("sorting confluence", c8_sorting),
        ("2D stuck vs consensus", c9_2d_contrast),
        ("graph beats ring", c10_graph_vs_ring),
        ("named async rules", c11_named_async_rules),
        ("determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(d) => println!("criterion {:2} PASS {name} [{secs:.1}s]: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:2} FAIL {name} [{secs:.1}s]: {d}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

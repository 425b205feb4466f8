//! Scoring rules on the density-classification task and searching rule space.
//!
//! Trial `t` of a [`ScoreSpec`] draws its initial density from
//! `p_values[t % p_values.len()]` and uses seed `derive(spec.seed, t)`, split
//! into sub-stream 0 (initial configuration) and 1 (update order or noise).
//! Because a trial's randomness depends only on its index, any partition of
//! the trials can be scored separately and merged with [`TrialTally::merge`].

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rule::{make_radius_rule, random_config, Config1D, Rule1D, Stepper};
use crate::seed;
use crate::stochastic::{run_async, run_noisy};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Regime {
    Sync,
    Async { updates_per_row: usize },
    Noisy { q: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    /// Fraction of trials ending in the uniform state of the initial majority.
    ExactConsensus,
    /// Mean fraction of final cells equal to the initial majority value.
    MajorityAgreement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSpec {
    pub regime: Regime,
    pub n: usize,
    /// Synchronous steps, or rendered rows for the async regime.
    pub steps: usize,
    pub p_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub metric: Metric,
    /// Under noise a trial counts as consensus when at most this fraction of
    /// cells disagrees with the initial majority.
    pub noisy_tolerance: f64,
}

/// Initial densities symmetric about 1/2, with 1/2 itself left out.
pub const DEFAULT_P_VALUES: [f64; 8] = [0.3, 0.35, 0.4, 0.45, 0.55, 0.6, 0.65, 0.7];

impl ScoreSpec {
    pub fn sync(n: usize, steps: usize, trials: usize, seed: u64) -> Self {
        ScoreSpec {
            regime: Regime::Sync,
            n,
            steps,
            p_values: DEFAULT_P_VALUES.to_vec(),
            trials,
            seed,
            metric: Metric::ExactConsensus,
            noisy_tolerance: 0.1,
        }
    }

    /// Asynchronous scoring at two updates per cell per rendered row.
    pub fn asynchronous(n: usize, rows: usize, trials: usize, seed: u64) -> Self {
        ScoreSpec {
            regime: Regime::Async { updates_per_row: 2 * n },
            metric: Metric::MajorityAgreement,
            steps: rows,
            ..ScoreSpec::sync(n, rows, trials, seed)
        }
    }

    pub fn noisy(n: usize, steps: usize, q: f64, trials: usize, seed: u64) -> Self {
        ScoreSpec { regime: Regime::Noisy { q }, ..ScoreSpec::sync(n, steps, trials, seed) }
    }

    pub fn with_p_values(mut self, p_values: Vec<f64>) -> Self {
        self.p_values = p_values;
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::range("trials", "at least one trial is required"));
        }
        if self.n == 0 {
            return Err(Error::range("n", "at least one cell is required"));
        }
        if self.p_values.is_empty() {
            return Err(Error::invalid("p values", "at least one initial density is required"));
        }
        for &p in &self.p_values {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::range("initial density", format!("{p} is outside [0, 1]")));
            }
            if p == 0.5 {
                return Err(Error::invalid("p values", "p = 1/2 has no majority and is excluded from scoring"));
            }
        }
        match self.regime {
            Regime::Async { updates_per_row: 0 } => Err(Error::range("updates per row", "must be at least 1")),
            Regime::Noisy { q } if !(0.0..=1.0).contains(&q) => {
                Err(Error::range("noise level", format!("{q} is outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    /// First 16 hex digits of the SHA-256 of the spec's JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        Sha256::digest(&json).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Integer tallies over a set of trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialTally {
    pub exact: u64,
    pub agree_cells: u64,
    pub used: u64,
    pub ties: u64,
}

impl TrialTally {
    pub fn merge(self, other: TrialTally) -> TrialTally {
        TrialTally {
            exact: self.exact + other.exact,
            agree_cells: self.agree_cells + other.agree_cells,
            used: self.used + other.used,
            ties: self.ties + other.ties,
        }
    }
}

fn run_sync_final(config: &Config1D, rule: &Rule1D, steps: usize) -> Config1D {
    let mut stepper = Stepper::new(rule);
    let mut cur = config.cells().to_vec();
    let mut next = vec![0u8; cur.len()];
    for _ in 0..steps {
        stepper.step_into(&cur, &mut next);
        if next == cur {
            break;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Config1D::new(cur).expect("binary cells")
}

/// Final configuration of one trial plus its initial majority.
pub fn run_trial(rule: &Rule1D, spec: &ScoreSpec, t: usize) -> Result<(Config1D, Option<u8>)> {
    let s = seed::derive(spec.seed, t as u64);
    let p = spec.p_values[t % spec.p_values.len()];
    let init = random_config(spec.n, p, seed::derive(s, 0))?;
    let majority = init.majority();
    let last = match spec.regime {
        Regime::Sync => run_sync_final(&init, rule, spec.steps),
        Regime::Async { updates_per_row } => run_async(&init, rule, updates_per_row, spec.steps, seed::derive(s, 1))?,
        Regime::Noisy { q } => run_noisy(&init, rule, q, spec.steps, seed::derive(s, 1))?,
    };
    Ok((last, majority))
}

/// Tally the trials with indices in `range`.
pub fn score_trials(rule: &Rule1D, spec: &ScoreSpec, range: Range<usize>) -> Result<TrialTally> {
    spec.validate()?;
    let tallies: Vec<TrialTally> = range
        .into_par_iter()
        .map(|t| {
            let (last, majority) = run_trial(rule, spec, t)?;
            let Some(m) = majority else {
                return Ok(TrialTally { ties: 1, ..TrialTally::default() });
            };
            let agree = last.cells().iter().filter(|&&v| v == m).count() as u64;
            let disagree = spec.n as u64 - agree;
            let exact = match spec.regime {
                Regime::Noisy { .. } => disagree as f64 <= spec.noisy_tolerance * spec.n as f64,
                _ => disagree == 0,
            };
            Ok(TrialTally { exact: u64::from(exact), agree_cells: agree, used: 1, ties: 0 })
        })
        .collect::<Result<_>>()?;
    Ok(tallies.into_iter().fold(TrialTally::default(), TrialTally::merge))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub rule: Option<u64>,
    pub label: String,
    pub metric_exact: f64,
    pub metric_agree: f64,
    /// Trials with a strict initial majority.
    pub trials: u64,
    pub spec_hash: String,
    pub spec: ScoreSpec,
}

impl SearchResult {
    pub fn from_tally(rule: &Rule1D, spec: &ScoreSpec, tally: TrialTally) -> Self {
        let used = tally.used.max(1) as f64;
        SearchResult {
            rule: rule.number().and_then(|n| u64::try_from(n).ok()),
            label: rule.label().to_string(),
            metric_exact: tally.exact as f64 / used,
            metric_agree: tally.agree_cells as f64 / (used * spec.n as f64),
            trials: tally.used,
            spec_hash: spec.hash(),
            spec: spec.clone(),
        }
    }

    pub fn primary(&self) -> f64 {
        match self.spec.metric {
            Metric::ExactConsensus => self.metric_exact,
            Metric::MajorityAgreement => self.metric_agree,
        }
    }
}

pub fn score_rule(rule: &Rule1D, spec: &ScoreSpec) -> Result<SearchResult> {
    let tally = score_trials(rule, spec, 0..spec.trials)?;
    Ok(SearchResult::from_tally(rule, spec, tally))
}

/// Where search candidates come from. Candidates are indexed so a search can
/// stop and resume at any index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleSource {
    /// Rule numbers `start..end`.
    Range { start: u64, end: u64 },
    /// `count` rule numbers drawn uniformly (with replacement) from the
    /// radius's rule space; candidate `i` comes from seed `derive(seed, i)`.
    Sample { count: u64, seed: u64 },
    List(Vec<u64>),
}

impl RuleSource {
    pub fn len(&self) -> u64 {
        match self {
            RuleSource::Range { start, end } => end.saturating_sub(*start),
            RuleSource::Sample { count, .. } => *count,
            RuleSource::List(v) => v.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, i: u64, radius: u32) -> u64 {
        match self {
            RuleSource::Range { start, .. } => start + i,
            RuleSource::Sample { seed, .. } => {
                let bits = 1u32 << (2 * radius + 1);
                let mut rng = seed::rng(seed::derive(*seed, i));
                let x: u64 = rng.random();
                if bits >= 64 {
                    x
                } else {
                    x & ((1u64 << bits) - 1)
                }
            }
            RuleSource::List(v) => v[i as usize],
        }
    }
}

/// Concatenation of rule sources.
pub fn candidate_count(sources: &[RuleSource]) -> u64 {
    sources.iter().map(RuleSource::len).sum()
}

pub fn candidate_at(sources: &[RuleSource], mut i: u64, radius: u32) -> u64 {
    for s in sources {
        if i < s.len() {
            return s.get(i, radius);
        }
        i -= s.len();
    }
    panic!("candidate index out of range")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub next_index: u64,
    pub master_seed: u64,
    pub spec_hash: String,
    /// Length of the results file covered by this checkpoint.
    pub results_bytes: u64,
}

#[derive(Clone, Debug)]
pub struct CheckpointFiles {
    pub results: PathBuf,
    pub checkpoint: PathBuf,
    /// Candidates scored between checkpoints.
    pub every: u64,
}

impl CheckpointFiles {
    pub fn in_dir(dir: &Path) -> Self {
        CheckpointFiles {
            results: dir.join("results.csv"),
            checkpoint: dir.join("checkpoint.json"),
            every: DEFAULT_CHECKPOINT_EVERY,
        }
    }
}

pub const DEFAULT_CHECKPOINT_EVERY: u64 = 10_000;
pub const RESULTS_HEADER: &str = "rule,metric_exact,metric_agree,trials,spec_hash";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub radius: u32,
    pub top_k: usize,
    /// Keep only self-complementary, reflection-symmetric candidates.
    pub symmetric_only: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { radius: 2, top_k: 10, symmetric_only: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct Row {
    rule: u64,
    exact: f64,
    agree: f64,
    trials: u64,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_rows(path: &Path, limit: u64, spec_hash: &str) -> Result<Vec<Row>> {
    let f = File::open(path)?;
    let mut reader = BufReader::new(f);
    let mut rows = Vec::new();
    let mut consumed = 0u64;
    let mut line = String::new();
    while consumed < limit {
        line.clear();
        let read = reader.read_line(&mut line)? as u64;
        if read == 0 {
            break;
        }
        consumed += read;
        let l = line.trim_end();
        if l == RESULTS_HEADER {
            continue;
        }
        let fields: Vec<&str> = l.split(',').collect();
        let parse_err = |e: &dyn std::fmt::Display| Error::Parse(format!("results row {l:?}: {e}"));
        if fields.len() != 5 {
            return Err(Error::Parse(format!("results row {l:?}: expected 5 fields")));
        }
        if fields[4] != spec_hash {
            return Err(Error::invalid("results file", format!("row scored under spec {} not {spec_hash}", fields[4])));
        }
        rows.push(Row {
            rule: fields[0].parse().map_err(|e| parse_err(&e))?,
            exact: fields[1].parse().map_err(|e| parse_err(&e))?,
            agree: fields[2].parse().map_err(|e| parse_err(&e))?,
            trials: fields[3].parse().map_err(|e| parse_err(&e))?,
        });
    }
    Ok(rows)
}

/// Score every candidate and return the `top_k` best by the spec's metric,
/// ties broken by ascending rule number. With `files`, every scored
/// candidate is appended to the results CSV and progress is checkpointed so
/// an interrupted search picks up where it stopped.
pub fn search_rules(
    sources: &[RuleSource],
    spec: &ScoreSpec,
    options: &SearchOptions,
    files: Option<&CheckpointFiles>,
) -> Result<Vec<SearchResult>> {
    spec.validate()?;
    let radius = options.radius;
    let total = candidate_count(sources);
    let hash = spec.hash();
    let mut rows: Vec<Row> = Vec::new();
    let mut start = 0u64;
    let mut results_bytes = 0u64;

    if let Some(files) = files {
        if files.checkpoint.exists() {
            let cp: Checkpoint = serde_json::from_slice(&fs::read(&files.checkpoint)?)?;
            if cp.spec_hash != hash || cp.master_seed != spec.seed {
                return Err(Error::invalid(
                    "checkpoint",
                    format!("{} belongs to spec {} with seed {}", files.checkpoint.display(), cp.spec_hash, cp.master_seed),
                ));
            }
            rows = read_rows(&files.results, cp.results_bytes, &hash)?;
            // drop rows written after the checkpoint
            OpenOptions::new().write(true).open(&files.results)?.set_len(cp.results_bytes)?;
            start = cp.next_index;
            results_bytes = cp.results_bytes;
        } else {
            let header = format!("{RESULTS_HEADER}\n");
            write_atomic(&files.results, header.as_bytes())?;
            results_bytes = header.len() as u64;
        }
    }

    let chunk = files.map_or(DEFAULT_CHECKPOINT_EVERY, |f| f.every.max(1));
    while start < total {
        let end = (start + chunk).min(total);
        let scored: Vec<Option<Row>> = (start..end)
            .into_par_iter()
            .map(|i| {
                let number = candidate_at(sources, i, radius);
                let rule = make_radius_rule(radius, number.into())?;
                if options.symmetric_only && !(rule.is_self_complementary() && rule.is_reflection_symmetric()) {
                    return Ok(None);
                }
                let tally = score_trials(&rule, spec, 0..spec.trials)?;
                let used = tally.used.max(1) as f64;
                Ok(Some(Row {
                    rule: number,
                    exact: tally.exact as f64 / used,
                    agree: tally.agree_cells as f64 / (used * spec.n as f64),
                    trials: tally.used,
                }))
            })
            .collect::<Result<_>>()?;
        let scored: Vec<Row> = scored.into_iter().flatten().collect();
        if let Some(files) = files {
            let mut text = String::new();
            for r in &scored {
                text.push_str(&format!("{},{},{},{},{hash}\n", r.rule, r.exact, r.agree, r.trials));
            }
            let mut f = OpenOptions::new().append(true).open(&files.results)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
            results_bytes += text.len() as u64;
            let cp = Checkpoint { next_index: end, master_seed: spec.seed, spec_hash: hash.clone(), results_bytes };
            write_atomic(&files.checkpoint, &serde_json::to_vec_pretty(&cp)?)?;
        }
        rows.extend(scored);
        start = end;
    }

    let key = |r: &Row| match spec.metric {
        Metric::ExactConsensus => r.exact,
        Metric::MajorityAgreement => r.agree,
    };
    rows.sort_by(|a, b| key(b).total_cmp(&key(a)).then(a.rule.cmp(&b.rule)));
    rows.dedup_by_key(|r| r.rule);
    Ok(rows
        .into_iter()
        .take(options.top_k)
        .map(|r| SearchResult {
            rule: Some(r.rule),
            label: format!("r{radius}:{}", r.rule),
            metric_exact: r.exact,
            metric_agree: r.agree,
            trials: r.trials,
            spec_hash: hash.clone(),
            spec: spec.clone(),
        })
        .collect())
}

/// Rough wall-clock estimate for scoring `count` candidates, from timing a
/// handful of sampled rules.
pub fn estimate_seconds(spec: &ScoreSpec, radius: u32, count: u64) -> Result<f64> {
    let probe = 8u64;
    let source = [RuleSource::Sample { count: probe, seed: spec.seed }];
    let t0 = std::time::Instant::now();
    for i in 0..probe {
        let rule = make_radius_rule(radius, candidate_at(&source, i, radius).into())?;
        score_trials(&rule, spec, 0..spec.trials)?;
    }
    Ok(t0.elapsed().as_secs_f64() / probe as f64 * count as f64 / rayon::current_num_threads() as f64)
}

/// Keep the candidates whose radius-`radius` table is both self-complementary
/// and reflection-symmetric.
pub fn filter_symmetric(candidates: &[u64], radius: u32) -> Result<Vec<u64>> {
    candidates
        .iter()
        .map(|&c| Ok((c, make_radius_rule(radius, c.into())?)))
        .filter_map(|r: Result<(u64, Rule1D)>| match r {
            Ok((c, rule)) => (rule.is_self_complementary() && rule.is_reflection_symmetric()).then_some(Ok(c)),
            Err(e) => Some(Err(e)),
        })
        .collect()
}

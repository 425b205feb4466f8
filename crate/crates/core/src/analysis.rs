//! Exact finite-size analysis of cyclic automata.
//!
//! States are `n`-bit integers with bit `i` holding cell `i` (cell 0 is the
//! least significant bit). A [`TransitionGraph`] stores the successor of all
//! `2^n` states together with the attractor (cycle) each state falls into.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::{make_elementary_rule, random_config, run_to_outcome, Config1D, Rule1D, RunOutcome};
use crate::seed;

pub const MAX_STG_CELLS: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionGraph {
    n: usize,
    successor: Vec<u32>,
    attractor_of: Vec<u32>,
    attractors: Vec<Vec<u32>>,
}

impl TransitionGraph {
    /// Resolve attractors of an explicit successor map over `2^n` states.
    pub fn from_successors(n: usize, successor: Vec<u32>) -> Result<Self> {
        if n > MAX_STG_CELLS {
            return Err(Error::Capacity(format!("{n} cells exceeds the transition-graph limit of {MAX_STG_CELLS}")));
        }
        let size = 1usize << n;
        if successor.len() != size {
            return Err(Error::invalid("successor map", format!("{} entries for n = {n}", successor.len())));
        }
        if let Some(&s) = successor.iter().find(|&&s| s as usize >= size) {
            return Err(Error::invalid("successor map", format!("successor {s} out of range")));
        }
        let (attractor_of, attractors) = resolve_attractors(&successor);
        Ok(TransitionGraph { n, successor, attractor_of, attractors })
    }

    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn state_count(&self) -> usize {
        self.successor.len()
    }

    pub fn successor(&self, state: u32) -> u32 {
        self.successor[state as usize]
    }

    pub fn successors(&self) -> &[u32] {
        &self.successor
    }

    pub fn attractor_of(&self, state: u32) -> usize {
        self.attractor_of[state as usize] as usize
    }

    /// Each attractor is listed in cycle order starting from its smallest state.
    pub fn attractors(&self) -> &[Vec<u32>] {
        &self.attractors
    }

    /// Number of states draining into each attractor.
    pub fn basin_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.attractors.len()];
        for &a in &self.attractor_of {
            sizes[a as usize] += 1;
        }
        sizes
    }

    /// Steps from `state` until it first enters its attractor cycle.
    pub fn transient_length(&self, state: u32) -> usize {
        let cycle: HashSet<u32> = self.attractors[self.attractor_of(state)].iter().copied().collect();
        let mut s = state;
        let mut steps = 0;
        while !cycle.contains(&s) {
            s = self.successor(s);
            steps += 1;
        }
        steps
    }
}

/// Iterative functional-graph cycle detection, O(2^n) time and memory.
fn resolve_attractors(successor: &[u32]) -> (Vec<u32>, Vec<Vec<u32>>) {
    const UNSEEN: u32 = u32::MAX;
    const ON_PATH: u32 = u32::MAX - 1;
    let mut attractor_of = vec![UNSEEN; successor.len()];
    let mut attractors: Vec<Vec<u32>> = Vec::new();
    let mut path: Vec<u32> = Vec::new();
    for start in 0..successor.len() as u32 {
        if attractor_of[start as usize] != UNSEEN {
            continue;
        }
        path.clear();
        let mut s = start;
        while attractor_of[s as usize] == UNSEEN {
            attractor_of[s as usize] = ON_PATH;
            path.push(s);
            s = successor[s as usize];
        }
        let id = if attractor_of[s as usize] == ON_PATH {
            let pos = path.iter().position(|&p| p == s).expect("cycle start is on the path");
            let mut cycle = path[pos..].to_vec();
            let min_pos = cycle.iter().enumerate().min_by_key(|(_, &v)| v).map(|(i, _)| i).unwrap_or(0);
            cycle.rotate_left(min_pos);
            attractors.push(cycle);
            (attractors.len() - 1) as u32
        } else {
            attractor_of[s as usize]
        };
        for &p in &path {
            attractor_of[p as usize] = id;
        }
    }
    (attractor_of, attractors)
}

/// Bit-sliced evaluator: one call computes the rule output for every cell of
/// a packed state at once via a multiplexer tree over rotated copies.
#[derive(Clone, Debug)]
pub struct PackedKernel {
    n: usize,
    mask: u64,
    shifts: Vec<u32>,
    tree: Vec<MuxNode>,
    root: usize,
}

#[derive(Clone, Copy, Debug)]
enum MuxNode {
    Const(bool),
    Mux { var: usize, hi: usize, lo: usize },
}

impl PackedKernel {
    pub fn new(rule: &Rule1D, n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::Capacity(format!("packed kernel supports 1..=64 cells, got {n}")));
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let shifts = rule
            .offsets()
            .iter()
            .map(|&o| o.rem_euclid(n as i32) as u32)
            .collect();
        let mut tree = Vec::new();
        let root = build_mux(rule.table(), 0, &mut tree);
        Ok(PackedKernel { n, mask, shifts, tree, root })
    }

    /// Bit i of the result is `cell(i + offset)`.
    #[inline]
    fn read(&self, state: u64, shift: u32) -> u64 {
        if shift == 0 {
            state
        } else {
            ((state >> shift) | (state << (self.n as u32 - shift))) & self.mask
        }
    }

    #[inline]
    pub fn step(&self, state: u64) -> u64 {
        let mut vars = [0u64; crate::rule::MAX_OFFSETS];
        for (j, &s) in self.shifts.iter().enumerate() {
            vars[j] = self.read(state, s);
        }
        self.eval(self.root, &vars)
    }

    fn eval(&self, node: usize, vars: &[u64]) -> u64 {
        match self.tree[node] {
            MuxNode::Const(false) => 0,
            MuxNode::Const(true) => self.mask,
            MuxNode::Mux { var, hi, lo } => {
                let v = vars[var];
                (v & self.eval(hi, vars)) | (!v & self.mask & self.eval(lo, vars))
            }
        }
    }
}

fn build_mux(table: &[u8], var: usize, tree: &mut Vec<MuxNode>) -> usize {
    if table.iter().all(|&v| v == table[0]) {
        tree.push(MuxNode::Const(table[0] == 1));
        return tree.len() - 1;
    }
    let half = table.len() / 2;
    // the first sampled offset is the most significant index bit
    let (lo_t, hi_t) = table.split_at(half);
    if lo_t == hi_t {
        return build_mux(lo_t, var + 1, tree);
    }
    let hi = build_mux(hi_t, var + 1, tree);
    let lo = build_mux(lo_t, var + 1, tree);
    tree.push(MuxNode::Mux { var, hi, lo });
    tree.len() - 1
}

/// Exact state transition graph of a 1D rule on a cycle of `n` cells.
pub fn build_stg(rule: &Rule1D, n: usize) -> Result<TransitionGraph> {
    if n == 0 || n > MAX_STG_CELLS {
        return Err(Error::Capacity(format!(
            "transition graph needs 1 <= n <= {MAX_STG_CELLS}, got {n}"
        )));
    }
    let kernel = PackedKernel::new(rule, n)?;
    let mut successor = vec![0u32; 1usize << n];
    successor
        .par_chunks_mut(1 << 12)
        .enumerate()
        .for_each(|(c, chunk)| {
            let base = (c as u64) << 12;
            for (i, out) in chunk.iter_mut().enumerate() {
                *out = kernel.step(base + i as u64) as u32;
            }
        });
    TransitionGraph::from_successors(n, successor)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Correct,
    Wrong,
    Stuck,
    TieExcluded,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Correct => "correct",
            Verdict::Wrong => "wrong",
            Verdict::Stuck => "stuck",
            Verdict::TieExcluded => "tie",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub correct: usize,
    pub wrong: usize,
    pub stuck: usize,
    pub tie: usize,
}

impl VerdictCounts {
    pub fn total(&self) -> usize {
        self.correct + self.wrong + self.stuck + self.tie
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub verdicts: Vec<Verdict>,
    pub counts: VerdictCounts,
    /// First offending states in increasing order, capped at [`ClassificationReport::EXAMPLE_CAP`].
    pub wrong_states: Vec<u32>,
    pub stuck_states: Vec<u32>,
}

impl ClassificationReport {
    pub const EXAMPLE_CAP: usize = 64;

    pub fn is_perfect(&self) -> bool {
        self.counts.wrong == 0 && self.counts.stuck == 0
    }

    pub fn verdict(&self, state: u32) -> Verdict {
        self.verdicts[state as usize]
    }
}

/// Strict majority of an n-bit state, `None` on a tie.
pub fn state_majority(state: u32, n: usize) -> Option<u8> {
    let ones = 2 * state.count_ones() as usize;
    match ones.cmp(&n) {
        std::cmp::Ordering::Greater => Some(1),
        std::cmp::Ordering::Less => Some(0),
        std::cmp::Ordering::Equal => None,
    }
}

/// Uniform value of an attractor, if it is a uniform fixed point.
fn attractor_value(cycle: &[u32], n: usize) -> Option<u8> {
    let all_ones = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    match cycle {
        [0] => Some(0),
        [s] if *s == all_ones => Some(1),
        _ => None,
    }
}

pub fn classify_states(stg: &TransitionGraph) -> ClassificationReport {
    let n = stg.cells();
    let values: Vec<Option<u8>> = stg.attractors().iter().map(|c| attractor_value(c, n)).collect();
    let mut counts = VerdictCounts::default();
    let mut wrong_states = Vec::new();
    let mut stuck_states = Vec::new();
    let verdicts = (0..stg.state_count() as u32)
        .map(|s| {
            let v = match (state_majority(s, n), values[stg.attractor_of(s)]) {
                (None, _) => Verdict::TieExcluded,
                (Some(_), None) => Verdict::Stuck,
                (Some(m), Some(a)) if m == a => Verdict::Correct,
                (Some(_), Some(_)) => Verdict::Wrong,
            };
            match v {
                Verdict::Correct => counts.correct += 1,
                Verdict::Wrong => {
                    counts.wrong += 1;
                    if wrong_states.len() < ClassificationReport::EXAMPLE_CAP {
                        wrong_states.push(s);
                    }
                }
                Verdict::Stuck => {
                    counts.stuck += 1;
                    if stuck_states.len() < ClassificationReport::EXAMPLE_CAP {
                        stuck_states.push(s);
                    }
                }
                Verdict::TieExcluded => counts.tie += 1,
            }
            v
        })
        .collect();
    ClassificationReport { n, verdicts, counts, wrong_states, stuck_states }
}

/// Rotate an n-bit state so cell i moves to cell i + j.
pub fn rotate_state(state: u32, n: usize, j: usize) -> u32 {
    let j = j % n;
    if j == 0 {
        return state;
    }
    let mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    ((state << j) | (state >> (n - j))) & mask
}

/// The smallest rotation of a state, used to group cyclic variations.
pub fn canonical_rotation(state: u32, n: usize) -> u32 {
    (0..n).map(|j| rotate_state(state, n, j)).min().unwrap_or(state)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleEvidence {
    pub rule: u32,
    /// Smallest state that is wrong or stuck, with its verdict.
    pub counterexample: Option<(u32, Verdict)>,
}

/// Check every elementary rule on a cycle of odd length `n <= 9` and report
/// the first misclassified state of each.
pub fn no_perfect_rule_check(n: usize) -> Result<Vec<RuleEvidence>> {
    if n.is_multiple_of(2) || n > 9 {
        return Err(Error::invalid("cell count", format!("n = {n}: expected an odd n <= 9")));
    }
    (0..256u32)
        .into_par_iter()
        .map(|number| {
            let rule = make_elementary_rule(number)?;
            let report = classify_states(&build_stg(&rule, n)?);
            let counterexample = report
                .verdicts
                .iter()
                .enumerate()
                .find(|(_, v)| matches!(v, Verdict::Wrong | Verdict::Stuck))
                .map(|(s, &v)| (s as u32, v));
            Ok(RuleEvidence { rule: number, counterexample })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsensusTimes {
    /// Steps to the first uniform state, for trials that reached one.
    pub times: Vec<usize>,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<usize>,
    /// Reached the uniform state opposite to the initial majority.
    pub wrong: usize,
    /// Stuck in a non-uniform cycle or out of steps.
    pub failures: usize,
    pub trials: usize,
}

/// Distribution of consensus times over seeded random initial conditions.
/// Trial `t` uses seed `derive(seed, t)`.
pub fn consensus_time_stats(
    rule: &Rule1D,
    n: usize,
    p: f64,
    trials: usize,
    max_steps: usize,
    seed: u64,
) -> Result<ConsensusTimes> {
    let outcomes: Vec<(RunOutcome, Option<u8>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let init = random_config(n, p, seed::derive(seed, t as u64))?;
            let (o, _) = run_to_outcome(&init, rule, max_steps);
            Ok((o, init.majority()))
        })
        .collect::<Result<_>>()?;
    let mut times = Vec::new();
    let (mut wrong, mut failures) = (0, 0);
    for (o, majority) in outcomes {
        match o {
            RunOutcome::Uniform { value, step } => {
                times.push(step);
                if majority.is_some_and(|m| m != value) {
                    wrong += 1;
                }
            }
            _ => failures += 1,
        }
    }
    let mean = (!times.is_empty()).then(|| times.iter().sum::<usize>() as f64 / times.len() as f64);
    let mut sorted = times.clone();
    sorted.sort_unstable();
    let median = (!sorted.is_empty()).then(|| {
        let m = sorted.len() / 2;
        if sorted.len() % 2 == 1 {
            sorted[m] as f64
        } else {
            (sorted[m - 1] + sorted[m]) as f64 / 2.0
        }
    });
    Ok(ConsensusTimes { max: sorted.last().copied(), times, mean, median, wrong, failures, trials })
}

/// Default bound on the number of flip subsets an attack search may try.
pub const DEFAULT_ATTACK_BUDGET: u64 = 2_000_000;

/// Outcome class used by the attack search: uniform value, or `None`.
fn outcome_class(config: &Config1D, rule: &Rule1D, max_steps: usize) -> Option<u8> {
    run_to_outcome(config, rule, max_steps).0.value()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackResult {
    /// Uniform value the unmodified configuration reaches (`None` = no consensus).
    pub baseline: Option<u8>,
    /// Smallest flip set changing the outcome, cells in increasing order.
    pub flips: Option<Vec<usize>>,
    /// Outcome after applying `flips`.
    pub attacked: Option<Option<u8>>,
    pub subsets_tried: u64,
}

/// Exhaustive search for the lexicographically first minimal set of initial
/// cells whose flip changes the reached outcome class.
pub fn adversarial_flip_search(
    rule: &Rule1D,
    config: &Config1D,
    max_flips: usize,
    max_steps: usize,
) -> Result<AttackResult> {
    adversarial_flip_search_with_budget(rule, config, max_flips, max_steps, DEFAULT_ATTACK_BUDGET)
}

pub fn adversarial_flip_search_with_budget(
    rule: &Rule1D,
    config: &Config1D,
    max_flips: usize,
    max_steps: usize,
    budget: u64,
) -> Result<AttackResult> {
    if max_flips > 3 {
        return Err(Error::range("max_flips", format!("{max_flips} > 3")));
    }
    let n = config.len();
    let total: u64 = (1..=max_flips as u64).map(|k| binomial(n as u64, k)).sum();
    if total > budget {
        return Err(Error::Capacity(format!(
            "{total} flip subsets of {n} cells exceeds the budget of {budget}"
        )));
    }
    let baseline = outcome_class(config, rule, max_steps);
    let mut tried = 0u64;
    for k in 1..=max_flips.min(n) {
        let subsets = combinations(n, k);
        // parallel over subsets, keep the first in lexicographic order
        let hit = subsets
            .par_iter()
            .enumerate()
            .find_first(|(_, subset)| {
                let mut c = config.clone();
                for &i in subset.iter() {
                    c.flip(i);
                }
                outcome_class(&c, rule, max_steps) != baseline
            })
            .map(|(i, s)| (i, s.clone()));
        match hit {
            Some((i, subset)) => {
                tried += i as u64 + 1;
                let mut c = config.clone();
                for &j in &subset {
                    c.flip(j);
                }
                let attacked = outcome_class(&c, rule, max_steps);
                return Ok(AttackResult { baseline, flips: Some(subset), attacked: Some(attacked), subsets_tried: tried });
            }
            None => tried += subsets.len() as u64,
        }
    }
    Ok(AttackResult { baseline, flips: None, attacked: None, subsets_tried: tried })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else { break };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// CSV rows `state,successor,attractor,verdict`.
pub fn stg_to_csv(stg: &TransitionGraph, report: &ClassificationReport) -> String {
    let mut out = String::from("state,successor,attractor,verdict\n");
    for s in 0..stg.state_count() as u32 {
        let _ = writeln!(out, "{s},{},{},{}", stg.successor(s), stg.attractor_of(s), report.verdict(s).as_str());
    }
    out
}

/// DOT graph with nodes labeled by state integer and colored by majority.
pub fn stg_to_dot(stg: &TransitionGraph) -> String {
    let n = stg.cells();
    let mut out = String::from("digraph stg {\n  node [style=filled, shape=circle, fontsize=8];\n");
    for s in 0..stg.state_count() as u32 {
        let color = match state_majority(s, n) {
            Some(1) => "#d62728",
            Some(_) => "#ffd92f",
            None => "#bbbbbb",
        };
        let _ = writeln!(out, "  {s} [fillcolor=\"{color}\"];");
    }
    for s in 0..stg.state_count() as u32 {
        let _ = writeln!(out, "  {s} -> {};", stg.successor(s));
    }
    out.push_str("}\n");
    out
}

/// Group states by their rotation class.
pub fn rotation_classes(states: &[u32], n: usize) -> HashMap<u32, Vec<u32>> {
    let mut classes: HashMap<u32, Vec<u32>> = HashMap::new();
    for &s in states {
        classes.entry(canonical_rotation(s, n)).or_default().push(s);
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::{gkl, identity_rule, step_sync};

    #[test]
    fn attractors_of_small_map() {
        // 0 -> 1 -> 2 -> 1, 3 -> 3
        let g = TransitionGraph::from_successors(2, vec![1, 2, 1, 3]).unwrap();
        assert_eq!(g.attractors(), &[vec![1, 2], vec![3]]);
        assert_eq!(g.attractor_of(0), 0);
        assert_eq!(g.transient_length(0), 1);
        assert_eq!(g.basin_sizes(), vec![3, 1]);
        assert!(TransitionGraph::from_successors(2, vec![0, 1, 2]).is_err());
        assert!(TransitionGraph::from_successors(2, vec![0, 1, 2, 4]).is_err());
    }

    #[test]
    fn identity_has_all_fixed_points() {
        let g = build_stg(&identity_rule(), 6).unwrap();
        assert_eq!(g.attractors().len(), 64);
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(build_stg(&gkl(), 25), Err(Error::Capacity(_))));
        assert!(matches!(build_stg(&gkl(), 0), Err(Error::Capacity(_))));
    }

    #[test]
    fn packed_kernel_matches_step_sync() {
        for rule in [gkl(), make_elementary_rule(110).unwrap(), make_elementary_rule(232).unwrap()] {
            for n in [1, 2, 3, 7, 12] {
                let k = PackedKernel::new(&rule, n).unwrap();
                for s in 0..1u64 << n {
                    let c = Config1D::from_state(s, n);
                    assert_eq!(k.step(s), step_sync(&c, &rule).to_state(), "{rule} n={n} s={s}");
                }
            }
        }
    }

    #[test]
    fn gkl_n5_is_perfect() {
        let r = classify_states(&build_stg(&gkl(), 5).unwrap());
        assert!(r.is_perfect());
        assert_eq!(r.counts.correct, 32);
    }

    #[test]
    fn rule_232_n7_gets_stuck() {
        let r = classify_states(&build_stg(&make_elementary_rule(232).unwrap(), 7).unwrap());
        assert!(r.counts.stuck > 0);
    }

    #[test]
    fn even_n_ties_are_excluded() {
        let r = classify_states(&build_stg(&gkl(), 6).unwrap());
        assert_eq!(r.counts.tie, 20);
        assert_eq!(r.counts.total(), 64);
    }

    #[test]
    fn impossibility_rule_232_counterexample() {
        let ev = no_perfect_rule_check(5).unwrap();
        assert_eq!(ev.len(), 256);
        let e232 = &ev[232];
        let (state, verdict) = e232.counterexample.unwrap();
        assert_eq!(verdict, Verdict::Stuck);
        assert_eq!(canonical_rotation(state, 5), canonical_rotation(0b00110, 5));
        // constant-0 rule: the first majority-1 state is wrong
        let (s0, v0) = ev[0].counterexample.unwrap();
        assert_eq!(v0, Verdict::Wrong);
        assert_eq!(state_majority(s0, 5), Some(1));
        assert!(no_perfect_rule_check(6).is_err());
    }

    #[test]
    fn consensus_time_edge_cases() {
        let t = consensus_time_stats(&gkl(), 20, 1.0, 3, 10, 0).unwrap();
        assert_eq!(t.times, vec![0, 0, 0]);
        assert_eq!(t.failures, 0);
        let a = consensus_time_stats(&gkl(), 49, 0.6, 10, 200, 4).unwrap();
        assert_eq!(a, consensus_time_stats(&gkl(), 49, 0.6, 10, 200, 4).unwrap());
    }

    #[test]
    fn attack_on_constant_rule_finds_nothing() {
        let zero = make_elementary_rule(0).unwrap();
        let c = random_config(20, 0.6, 1).unwrap();
        let a = adversarial_flip_search(&zero, &c, 2, 50).unwrap();
        assert_eq!(a.flips, None);
        assert_eq!(a.baseline, Some(0));
    }

    #[test]
    fn attack_follows_actual_outcome() {
        // the identity rule never reaches consensus from a mixed state;
        // flipping the lone 0 makes the state uniform
        let c = Config1D::parse("1101").unwrap();
        let a = adversarial_flip_search(&identity_rule(), &c, 1, 10).unwrap();
        assert_eq!(a.baseline, None);
        assert_eq!(a.flips, Some(vec![2]));
        assert_eq!(a.attacked, Some(Some(1)));
    }

    #[test]
    fn attack_guards() {
        let c = Config1D::zeros(100);
        assert!(adversarial_flip_search(&gkl(), &c, 4, 10).is_err());
        assert!(matches!(
            adversarial_flip_search_with_budget(&gkl(), &c, 3, 10, 1000),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn combinations_lexicographic() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(binomial(49, 2), 1176);
    }

    #[test]
    fn rotation_helpers() {
        assert_eq!(rotate_state(0b00011, 5, 1), 0b00110);
        assert_eq!(rotate_state(0b10001, 5, 1), 0b00011);
        assert_eq!(canonical_rotation(0b10100, 5), 0b00101);
    }

    #[test]
    fn exports() {
        let g = build_stg(&gkl(), 3).unwrap();
        let r = classify_states(&g);
        let csv = stg_to_csv(&g, &r);
        assert!(csv.starts_with("state,successor,attractor,verdict\n0,0,0,correct\n"));
        assert_eq!(csv.lines().count(), 9);
        let dot = stg_to_dot(&g);
        assert!(dot.contains("7 -> 7;"));
    }
}

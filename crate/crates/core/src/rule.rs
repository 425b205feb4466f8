//! One-dimensional rules, cyclic configurations and synchronous evolution.
//!
//! A [`Rule1D`] reads the cells at a fixed list of relative offsets and looks
//! the resulting pattern up in a table. The value read at `offsets[0]` is the
//! most significant bit of the pattern index, so for the usual contiguous
//! neighborhoods entry `v` of the table equals bit `v` of the rule number and
//! the elementary rule 232 is the three-cell majority.

use std::fmt;

use num_rational::Ratio;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Largest number of sampled offsets a table rule may read (table of 2^24 bytes).
pub const MAX_OFFSETS: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule1D {
    offsets: Vec<i32>,
    table: Vec<u8>,
    label: String,
}

impl Rule1D {
    /// Build a rule from raw offsets and a table indexed by the pattern read
    /// at those offsets (first offset = most significant bit).
    pub fn from_table(offsets: Vec<i32>, table: Vec<u8>, label: impl Into<String>) -> Result<Self> {
        validate_offsets(&offsets)?;
        if table.len() != 1usize << offsets.len() {
            return Err(Error::invalid(
                "rule table",
                format!("expected {} entries for {} offsets, got {}", 1usize << offsets.len(), offsets.len(), table.len()),
            ));
        }
        if let Some(v) = table.iter().find(|&&v| v > 1) {
            return Err(Error::invalid("rule table", format!("entry {v} is not 0 or 1")));
        }
        Ok(Rule1D { offsets, table, label: label.into() })
    }

    /// Build a rule from a boolean function of the sampled values, listed in offset order.
    pub fn from_fn(offsets: Vec<i32>, label: impl Into<String>, f: impl Fn(&[u8]) -> u8) -> Result<Self> {
        validate_offsets(&offsets)?;
        let k = offsets.len();
        let mut vals = vec![0u8; k];
        let table = (0..1usize << k)
            .map(|v| {
                for (j, slot) in vals.iter_mut().enumerate() {
                    *slot = ((v >> (k - 1 - j)) & 1) as u8;
                }
                u8::from(f(&vals) != 0)
            })
            .collect();
        Rule1D::from_table(offsets, table, label)
    }

    pub fn offsets(&self) -> &[i32] {
        &self.offsets
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Output for a pattern index.
    #[inline]
    pub fn output(&self, pattern: usize) -> u8 {
        self.table[pattern]
    }

    /// Output for explicit sampled values in offset order.
    pub fn apply(&self, values: &[u8]) -> u8 {
        assert_eq!(values.len(), self.offsets.len(), "pattern length must match offset count");
        let idx = values.iter().fold(0usize, |acc, &v| (acc << 1) | usize::from(v & 1));
        self.table[idx]
    }

    /// The table read back as a rule number, if it fits in 128 bits.
    pub fn number(&self) -> Option<u128> {
        let mut n: u128 = 0;
        for (v, &bit) in self.table.iter().enumerate() {
            if bit == 1 {
                if v >= 128 {
                    return None;
                }
                n |= 1u128 << v;
            }
        }
        Some(n)
    }

    /// Smallest and largest offsets.
    pub fn span(&self) -> (i32, i32) {
        let lo = *self.offsets.iter().min().expect("offsets are non-empty");
        let hi = *self.offsets.iter().max().expect("offsets are non-empty");
        (lo, hi)
    }

    /// `table(!pattern) == 1 - table(pattern)` for every pattern.
    pub fn is_self_complementary(&self) -> bool {
        let mask = self.table.len() - 1;
        (0..self.table.len()).all(|v| self.table[v ^ mask] == 1 - self.table[v])
    }

    /// Invariant under the mirror image `x -> -x`. Requires the offset set to
    /// be closed under negation.
    pub fn is_reflection_symmetric(&self) -> bool {
        let k = self.offsets.len();
        let mirror: Option<Vec<usize>> = self
            .offsets
            .iter()
            .map(|&o| self.offsets.iter().position(|&p| p == -o))
            .collect();
        let Some(mirror) = mirror else { return false };
        (0..self.table.len()).all(|v| {
            let mut w = 0usize;
            for (j, &m) in mirror.iter().enumerate() {
                let bit = (v >> (k - 1 - j)) & 1;
                w |= bit << (k - 1 - m);
            }
            self.table[v] == self.table[w]
        })
    }

    /// The same rule with colors 0 and 1 swapped.
    pub fn conjugate(&self) -> Rule1D {
        let mask = self.table.len() - 1;
        let table = (0..self.table.len()).map(|v| 1 - self.table[v ^ mask]).collect();
        Rule1D { offsets: self.offsets.clone(), table, label: format!("{}*", self.label) }
    }
}

impl fmt::Display for Rule1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn validate_offsets(offsets: &[i32]) -> Result<()> {
    if offsets.is_empty() {
        return Err(Error::invalid("offsets", "at least one offset is required"));
    }
    if offsets.len() > MAX_OFFSETS {
        return Err(Error::invalid("offsets", format!("{} offsets exceeds the limit of {MAX_OFFSETS}", offsets.len())));
    }
    for (i, o) in offsets.iter().enumerate() {
        if offsets[..i].contains(o) {
            return Err(Error::invalid("offsets", format!("duplicate offset {o}")));
        }
    }
    Ok(())
}

fn table_from_number(k: usize, number: u128) -> Vec<u8> {
    (0..1usize << k)
        .map(|v| if v < 128 { ((number >> v) & 1) as u8 } else { 0 })
        .collect()
}

pub fn make_elementary_rule(number: u32) -> Result<Rule1D> {
    if number > 255 {
        return Err(Error::range("elementary rule number", format!("{number} > 255")));
    }
    let rule = make_radius_rule(1, number.into())?;
    Ok(rule.with_label(format!("e{number}")))
}

/// Contiguous rule of the given radius, numbered by the standard convention.
pub fn make_radius_rule(radius: u32, number: u128) -> Result<Rule1D> {
    if radius == 0 {
        return Err(Error::range("radius", "radius must be at least 1"));
    }
    let k = 2 * radius as usize + 1;
    if k > MAX_OFFSETS {
        return Err(Error::range("radius", format!("radius {radius} needs a table of 2^{k} entries")));
    }
    if k < 7 && number >> (1u32 << k) != 0 {
        return Err(Error::range(
            "rule number",
            format!("{number} needs more than {} bits for radius {radius}", 1u32 << k),
        ));
    }
    let r = radius as i32;
    let offsets = (-r..=r).collect();
    Rule1D::from_table(offsets, table_from_number(k, number), format!("r{radius}:{number}"))
}

pub const GKL_OFFSETS: [i32; 5] = [-3, -1, 0, 1, 3];

/// GKL-style rule over `(l3, l1, c, r1, r3)`: a 0 cell polls its two right
/// cells, a 1 cell its two left cells, and the cell becomes 1 when the poll
/// plus its own value reaches 2.
pub fn make_gkl_rule(offsets: [i32; 5]) -> Result<Rule1D> {
    let [l3, l1, c, r1, r3] = offsets;
    if c != 0 || l3 >= 0 || l1 >= 0 || r1 <= 0 || r3 <= 0 {
        return Err(Error::invalid(
            "GKL offsets",
            format!("{offsets:?}: expected two negative offsets, 0, then two positive offsets"),
        ));
    }
    let label = if offsets == GKL_OFFSETS {
        "gkl".to_string()
    } else {
        format!("gkl:{l3},{l1},{c},{r1},{r3}")
    };
    Rule1D::from_fn(offsets.to_vec(), label, |v| {
        let (l3, l1, c, r1, r3) = (v[0], v[1], v[2], v[3], v[4]);
        let poll = if c == 0 { r1 + r3 } else { l1 + l3 };
        u8::from(poll + c >= 2)
    })
}

pub fn gkl() -> Rule1D {
    make_gkl_rule(GKL_OFFSETS).expect("standard GKL offsets are valid")
}

/// Majority of the cells at an odd number of distinct offsets.
pub fn make_sampled_majority(offsets: &[i32]) -> Result<Rule1D> {
    if offsets.len().is_multiple_of(2) {
        return Err(Error::invalid(
            "majority offsets",
            format!("{} offsets: an odd count is required for a strict majority", offsets.len()),
        ));
    }
    let label = format!(
        "maj:{}",
        offsets.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(",")
    );
    let k = offsets.len();
    Rule1D::from_fn(offsets.to_vec(), label, |v| {
        let ones = v.iter().filter(|&&x| x == 1).count();
        u8::from(2 * ones > k)
    })
}

pub fn identity_rule() -> Rule1D {
    make_sampled_majority(&[0]).expect("single offset").with_label("identity")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Consensus {
    AllZero,
    AllOne,
    Mixed,
}

impl Consensus {
    pub fn as_str(self) -> &'static str {
        match self {
            Consensus::AllZero => "all-0",
            Consensus::AllOne => "all-1",
            Consensus::Mixed => "none",
        }
    }

    pub fn value(self) -> Option<u8> {
        match self {
            Consensus::AllZero => Some(0),
            Consensus::AllOne => Some(1),
            Consensus::Mixed => None,
        }
    }
}

/// A cyclic line of binary cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Config1D {
    cells: Vec<u8>,
}

impl Config1D {
    pub fn new(cells: Vec<u8>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::invalid("configuration", "at least one cell is required"));
        }
        if let Some(v) = cells.iter().find(|&&v| v > 1) {
            return Err(Error::invalid("configuration", format!("cell value {v} is not 0 or 1")));
        }
        Ok(Config1D { cells })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "configuration needs at least one cell");
        Config1D { cells: vec![0; n] }
    }

    pub fn ones(n: usize) -> Self {
        assert!(n > 0, "configuration needs at least one cell");
        Config1D { cells: vec![1; n] }
    }

    /// Parse a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let cells = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("unexpected character {other:?} in configuration"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Config1D::new(cells)
    }

    /// Decode an n-bit state integer, bit i = cell i.
    pub fn from_state(state: u64, n: usize) -> Self {
        assert!((1..=64).contains(&n));
        Config1D { cells: (0..n).map(|i| ((state >> i) & 1) as u8).collect() }
    }

    /// Encode as an integer, bit i = cell i. Panics above 64 cells.
    pub fn to_state(&self) -> u64 {
        assert!(self.len() <= 64, "state encoding holds at most 64 cells");
        self.cells.iter().enumerate().fold(0u64, |s, (i, &v)| s | (u64::from(v) << i))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<u8> {
        self.cells
    }

    /// Cyclic access.
    pub fn cell(&self, i: i64) -> u8 {
        self.cells[i.rem_euclid(self.cells.len() as i64) as usize]
    }

    pub fn ones_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v == 1).count()
    }

    pub fn density(&self) -> Ratio<usize> {
        Ratio::new(self.ones_count(), self.len())
    }

    pub fn density_f64(&self) -> f64 {
        self.ones_count() as f64 / self.len() as f64
    }

    pub fn consensus_state(&self) -> Consensus {
        let ones = self.ones_count();
        if ones == 0 {
            Consensus::AllZero
        } else if ones == self.len() {
            Consensus::AllOne
        } else {
            Consensus::Mixed
        }
    }

    /// The strict majority value, or `None` on an exact tie.
    pub fn majority(&self) -> Option<u8> {
        let ones = 2 * self.ones_count();
        match ones.cmp(&self.len()) {
            std::cmp::Ordering::Greater => Some(1),
            std::cmp::Ordering::Less => Some(0),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// Shift right by `j`: the new cell `i + j` holds the old cell `i`.
    pub fn rotate(&self, j: i64) -> Config1D {
        let n = self.len() as i64;
        let cells = (0..n).map(|i| self.cell(i - j)).collect();
        Config1D { cells }
    }

    pub fn complement(&self) -> Config1D {
        Config1D { cells: self.cells.iter().map(|&v| 1 - v).collect() }
    }

    pub fn flip(&mut self, i: usize) {
        self.cells[i] ^= 1;
    }

    pub fn set(&mut self, i: usize, value: u8) {
        self.cells[i] = value & 1;
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }
}

impl fmt::Display for Config1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.cells {
            f.write_str(if v == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Each cell independently 1 with probability `p`.
pub fn random_config(n: usize, p: f64, seed: u64) -> Result<Config1D> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::range("probability", format!("p = {p} is outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::invalid("configuration", "at least one cell is required"));
    }
    let mut rng = seed::rng(seed);
    Ok(Config1D { cells: (0..n).map(|_| u8::from(rng.random::<f64>() < p)).collect() })
}

/// Reusable synchronous stepper. Keeps a padded copy of the line so the
/// inner loop reads neighbors without modular arithmetic.
#[derive(Clone, Debug)]
pub struct Stepper<'r> {
    rule: &'r Rule1D,
    left: usize,
    padded: Vec<u8>,
    shifted: Vec<usize>,
}

impl<'r> Stepper<'r> {
    pub fn new(rule: &'r Rule1D) -> Self {
        let (lo, _) = rule.span();
        let left = lo.min(0).unsigned_abs() as usize;
        let shifted = rule.offsets().iter().map(|&o| (o + left as i32) as usize).collect();
        Stepper { rule, left, padded: Vec::new(), shifted }
    }

    pub fn rule(&self) -> &Rule1D {
        self.rule
    }

    /// Write the successor of `cur` into `next` (same length).
    pub fn step_into(&mut self, cur: &[u8], next: &mut [u8]) {
        let n = cur.len();
        debug_assert_eq!(n, next.len());
        let (_, hi) = self.rule.span();
        let right = hi.max(0) as usize;
        let total = n + self.left + right;
        self.padded.clear();
        self.padded.reserve(total);
        for j in 0..total {
            let i = (j as i64 - self.left as i64).rem_euclid(n as i64) as usize;
            self.padded.push(cur[i]);
        }
        let table = self.rule.table();
        for (i, out) in next.iter_mut().enumerate() {
            let mut idx = 0usize;
            for &s in &self.shifted {
                idx = (idx << 1) | usize::from(self.padded[i + s]);
            }
            *out = table[idx];
        }
    }

    /// Output of the rule at a single cell of `cur`, cyclic.
    pub fn cell_output(&self, cur: &[u8], i: usize) -> u8 {
        let n = cur.len() as i64;
        let mut idx = 0usize;
        for &o in self.rule.offsets() {
            let j = (i as i64 + o as i64).rem_euclid(n) as usize;
            idx = (idx << 1) | usize::from(cur[j]);
        }
        self.rule.output(idx)
    }

    pub fn step(&mut self, config: &Config1D) -> Config1D {
        let mut next = vec![0u8; config.len()];
        self.step_into(config.cells(), &mut next);
        Config1D { cells: next }
    }
}

/// One synchronous step: every cell replaced by the rule output on its
/// cyclic neighborhood.
pub fn step_sync(config: &Config1D, rule: &Rule1D) -> Config1D {
    Stepper::new(rule).step(config)
}

/// The initial configuration followed by `steps` synchronous successors.
pub fn evolve(config: &Config1D, rule: &Rule1D, steps: usize) -> Vec<Config1D> {
    let mut stepper = Stepper::new(rule);
    let mut history = Vec::with_capacity(steps + 1);
    history.push(config.clone());
    for _ in 0..steps {
        let next = stepper.step(history.last().expect("history is non-empty"));
        history.push(next);
    }
    history
}

/// Fraction of 1s in each row of a history.
pub fn density_series(history: &[Config1D]) -> Vec<f64> {
    history.iter().map(Config1D::density_f64).collect()
}

/// How a deterministic run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunOutcome {
    /// First reached a uniform fixed point at the given step.
    Uniform { value: u8, step: usize },
    /// Entered a cycle that is not a uniform fixed point.
    Stuck { step: usize, period: usize },
    /// Neither within the step budget.
    Timeout,
}

impl RunOutcome {
    pub fn value(self) -> Option<u8> {
        match self {
            RunOutcome::Uniform { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// Run synchronously until a uniform fixed point, a repeated state, or
/// `max_steps`. Also returns the last configuration.
pub fn run_to_outcome(config: &Config1D, rule: &Rule1D, max_steps: usize) -> (RunOutcome, Config1D) {
    let mut stepper = Stepper::new(rule);
    let mut seen = std::collections::HashMap::new();
    let mut cur = config.clone();
    let mut next = vec![0u8; cur.len()];
    for step in 0..=max_steps {
        if let Some(v) = cur.consensus_state().value() {
            stepper.step_into(cur.cells(), &mut next);
            if next == cur.cells() {
                return (RunOutcome::Uniform { value: v, step }, cur);
            }
        }
        if let Some(first) = seen.insert(cur.clone(), step) {
            return (RunOutcome::Stuck { step: first, period: step - first }, cur);
        }
        if step == max_steps {
            break;
        }
        stepper.step_into(cur.cells(), &mut next);
        cur.cells_mut().copy_from_slice(&next);
    }
    (RunOutcome::Timeout, cur)
}

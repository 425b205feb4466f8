//! Noisy and asynchronous evolution, phase diagrams, and block automata.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::{evolve, random_config, Config1D, Rule1D, Stepper};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub q: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(q: f64, seed: u64) -> Result<Self> {
        check_probability("noise level", q)?;
        Ok(NoiseSpec { q, seed })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schedule {
    Synchronous,
    RandomSequential { updates_per_row: usize },
}

impl Schedule {
    pub fn random_sequential(updates_per_row: usize) -> Result<Self> {
        if updates_per_row == 0 {
            return Err(Error::range("updates per row", "must be at least 1"));
        }
        Ok(Schedule::RandomSequential { updates_per_row })
    }
}

fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::range(what, format!("{p} is outside [0, 1]")))
    }
}

/// Synchronous rule step followed by independent per-cell flips with
/// probability `q`, for `steps` steps.
pub fn evolve_noisy(config: &Config1D, rule: &Rule1D, q: f64, steps: usize, seed: u64) -> Result<Vec<Config1D>> {
    check_probability("noise level", q)?;
    if q == 0.0 {
        return Ok(evolve(config, rule, steps));
    }
    let mut rng = seed::rng(seed);
    let mut stepper = Stepper::new(rule);
    let mut history = Vec::with_capacity(steps + 1);
    history.push(config.clone());
    for _ in 0..steps {
        let mut next = stepper.step(history.last().expect("non-empty"));
        for i in 0..next.len() {
            if rng.random::<f64>() < q {
                next.flip(i);
            }
        }
        history.push(next);
    }
    Ok(history)
}

/// Last configuration of [`evolve_noisy`] without keeping the history.
pub fn run_noisy(config: &Config1D, rule: &Rule1D, q: f64, steps: usize, seed: u64) -> Result<Config1D> {
    check_probability("noise level", q)?;
    let mut rng = seed::rng(seed);
    let mut stepper = Stepper::new(rule);
    let mut cur = config.clone().into_cells();
    let mut next = vec![0u8; cur.len()];
    for _ in 0..steps {
        stepper.step_into(&cur, &mut next);
        if q > 0.0 {
            for v in next.iter_mut() {
                if rng.random::<f64>() < q {
                    *v ^= 1;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Config1D::new(cur)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    /// `mean[i][j]` is the mean final density for `p_grid[i]`, `q_grid[j]`.
    pub mean: Vec<Vec<f64>>,
}

/// Mean final density over initial density and noise level. Trial `t` of
/// entry `(i, j)` uses seed `derive_path(seed, [i, j, t])`; the initial
/// configuration and the noise stream are split from it as sub-streams 0 and 1.
pub fn phase_diagram(
    rule: &Rule1D,
    n: usize,
    steps: usize,
    p_grid: &[f64],
    q_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<PhaseDiagram> {
    for &p in p_grid {
        check_probability("initial density", p)?;
    }
    for &q in q_grid {
        check_probability("noise level", q)?;
    }
    let cells: Vec<(usize, usize)> = (0..p_grid.len()).flat_map(|i| (0..q_grid.len()).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let mut total = 0.0;
            for t in 0..trials {
                let s = seed::derive_path(seed, &[i as u64, j as u64, t as u64]);
                let init = random_config(n, p_grid[i], seed::derive(s, 0))?;
                total += run_noisy(&init, rule, q_grid[j], steps, seed::derive(s, 1))?.density_f64();
            }
            Ok(total / trials.max(1) as f64)
        })
        .collect::<Result<_>>()?;
    let mean = values.chunks(q_grid.len().max(1)).map(<[f64]>::to_vec).collect();
    Ok(PhaseDiagram { p_grid: p_grid.to_vec(), q_grid: q_grid.to_vec(), mean })
}

/// Mean final density against initial density with no noise.
pub fn final_density_curve(rule: &Rule1D, n: usize, steps: usize, p_values: &[f64], trials: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let d = phase_diagram(rule, n, steps, p_values, &[0.0], trials, seed)?;
    Ok(d.p_grid.iter().zip(&d.mean).map(|(&p, row)| (p, row[0])).collect())
}

/// One asynchronous single-cell update.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateEvent {
    /// Rendered row during which the update happened (1-based; row 0 is the initial state).
    pub row: usize,
    pub cell: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsyncHistory {
    /// Initial configuration followed by one configuration per rendered row.
    pub rows: Vec<Config1D>,
    /// Every update in the order applied.
    pub updates: Vec<UpdateEvent>,
}

/// Random-sequential updating: each rendered row applies `updates_per_row`
/// in-place updates at uniformly chosen cells (with replacement).
pub fn evolve_async(config: &Config1D, rule: &Rule1D, updates_per_row: usize, rows: usize, seed: u64) -> Result<AsyncHistory> {
    Schedule::random_sequential(updates_per_row)?;
    let mut rng = seed::rng(seed);
    let stepper = Stepper::new(rule);
    let n = config.len();
    let mut cur = config.clone().into_cells();
    let mut history = Vec::with_capacity(rows + 1);
    let mut updates = Vec::with_capacity(rows * updates_per_row);
    history.push(config.clone());
    for row in 1..=rows {
        for _ in 0..updates_per_row {
            let i = rng.random_range(0..n);
            cur[i] = stepper.cell_output(&cur, i);
            updates.push(UpdateEvent { row, cell: i });
        }
        history.push(Config1D::new(cur.clone())?);
    }
    Ok(AsyncHistory { rows: history, updates })
}

/// Final configuration of [`evolve_async`] without recording history.
pub fn run_async(config: &Config1D, rule: &Rule1D, updates_per_row: usize, rows: usize, seed: u64) -> Result<Config1D> {
    Schedule::random_sequential(updates_per_row)?;
    let mut rng = seed::rng(seed);
    let stepper = Stepper::new(rule);
    let n = config.len();
    let mut cur = config.clone().into_cells();
    for _ in 0..rows * updates_per_row {
        let i = rng.random_range(0..n);
        cur[i] = stepper.cell_output(&cur, i);
    }
    Config1D::new(cur)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub mean: f64,
    /// Standard error of the mean over trials.
    pub std_err: f64,
}

/// Mean final density of asynchronous runs against initial density.
/// Trial `t` at `p_values[i]` uses `derive_path(seed, [i, t])`, split into
/// sub-streams 0 (initial state) and 1 (update order).
pub fn async_final_density_curve(
    rule: &Rule1D,
    n: usize,
    rows: usize,
    updates_per_row: usize,
    p_values: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    p_values
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            check_probability("initial density", p)?;
            let finals: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let s = seed::derive_path(seed, &[i as u64, t as u64]);
                    let init = random_config(n, p, seed::derive(s, 0))?;
                    Ok(run_async(&init, rule, updates_per_row, rows, seed::derive(s, 1))?.density_f64())
                })
                .collect::<Result<_>>()?;
            let m = finals.len().max(1) as f64;
            let mean = finals.iter().sum::<f64>() / m;
            let var = if finals.len() > 1 {
                finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            Ok(CurvePoint { p, mean, std_err: (var / m).sqrt() })
        })
        .collect()
}

/// Pair-to-pair rule for a block automaton acting on adjacent cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockRule {
    /// Image of the pair `(a, b)` stored at index `2a + b`.
    map: [(u8, u8); 4],
}

impl BlockRule {
    pub fn new(map: [(u8, u8); 4]) -> Result<Self> {
        if map.iter().any(|&(a, b)| a > 1 || b > 1) {
            return Err(Error::invalid("block rule", "pair values must be 0 or 1"));
        }
        Ok(BlockRule { map })
    }

    /// `(1, 0) -> (0, 1)`, all other pairs unchanged.
    pub fn sort() -> Self {
        BlockRule { map: [(0, 0), (0, 1), (0, 1), (1, 1)] }
    }

    pub fn identity() -> Self {
        BlockRule { map: [(0, 0), (0, 1), (1, 0), (1, 1)] }
    }

    #[inline]
    pub fn apply(&self, a: u8, b: u8) -> (u8, u8) {
        self.map[usize::from(2 * a + b)]
    }

    /// Whether the pair `(a, b)` would change.
    #[inline]
    pub fn changes(&self, a: u8, b: u8) -> bool {
        self.apply(a, b) != (a, b)
    }

    pub fn conserves_ones(&self) -> bool {
        (0..4u8).all(|v| {
            let (a, b) = (v >> 1, v & 1);
            let (c, d) = self.apply(a, b);
            a + b == c + d
        })
    }
}

/// Which adjacent pairs a block update may act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairBoundary {
    /// Pairs `(i, i+1)` for `i` in `0..n-1`.
    Line,
    /// Pairs `(i, (i+1) mod n)` for `i` in `0..n`.
    Cycle,
}

impl PairBoundary {
    pub fn pair_count(self, n: usize) -> usize {
        match self {
            PairBoundary::Line => n - 1,
            PairBoundary::Cycle => n,
        }
    }
}

pub(crate) fn apply_block(cells: &mut [u8], rule: &BlockRule, i: usize) {
    let j = (i + 1) % cells.len();
    let (a, b) = rule.apply(cells[i], cells[j]);
    cells[i] = a;
    cells[j] = b;
}

/// One block update per row at a uniformly random adjacent pair.
pub fn evolve_block_async(
    config: &Config1D,
    rule: &BlockRule,
    boundary: PairBoundary,
    rows: usize,
    seed: u64,
) -> Result<Vec<Config1D>> {
    if config.len() < 2 {
        return Err(Error::invalid("configuration", "block updates need at least two cells"));
    }
    let mut rng = seed::rng(seed);
    let pairs = boundary.pair_count(config.len());
    let mut cur = config.clone().into_cells();
    let mut history = Vec::with_capacity(rows + 1);
    history.push(config.clone());
    for _ in 0..rows {
        apply_block(&mut cur, rule, rng.random_range(0..pairs));
        history.push(Config1D::new(cur.clone())?);
    }
    Ok(history)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRun {
    pub terminal: Config1D,
    /// Number of random pair updates applied, including no-op ones.
    pub updates: u64,
}

/// Apply random block updates until no pair would change. Fails with a
/// capacity error after `max_updates` updates.
pub fn run_block_to_terminal(
    config: &Config1D,
    rule: &BlockRule,
    boundary: PairBoundary,
    max_updates: u64,
    seed: u64,
) -> Result<BlockRun> {
    let n = config.len();
    if n < 2 {
        return Ok(BlockRun { terminal: config.clone(), updates: 0 });
    }
    let pairs = boundary.pair_count(n);
    let mut cells = config.clone().into_cells();
    let active = |c: &[u8], i: usize| rule.changes(c[i], c[(i + 1) % n]);
    let mut live = (0..pairs).filter(|&i| active(&cells, i)).count();
    let mut rng = seed::rng(seed);
    let mut updates = 0u64;
    while live > 0 {
        if updates >= max_updates {
            return Err(Error::Capacity(format!("block evolution did not terminate within {max_updates} updates")));
        }
        let i = rng.random_range(0..pairs);
        updates += 1;
        if !active(&cells, i) {
            continue;
        }
        // pairs overlapping cells i and i+1
        let touched: Vec<usize> = [i as i64 - 1, i as i64, i as i64 + 1]
            .into_iter()
            .filter_map(|k| match boundary {
                PairBoundary::Line => (0..pairs as i64).contains(&k).then_some(k as usize),
                PairBoundary::Cycle => Some(k.rem_euclid(n as i64) as usize),
            })
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let before = touched.iter().filter(|&&k| active(&cells, k)).count();
        apply_block(&mut cells, rule, i);
        let after = touched.iter().filter(|&&k| active(&cells, k)).count();
        live = live + after - before;
    }
    Ok(BlockRun { terminal: Config1D::new(cells)?, updates })
}

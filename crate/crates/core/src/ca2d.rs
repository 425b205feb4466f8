//! Two-dimensional toroidal automata: totalistic codes, asymmetric sampled
//! majority and the plus-shaped GKL analog.
//!
//! Offsets are `(dy, dx)` with `dy = -1` the row above (north) and `dx = 1`
//! the column to the right (east).

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Config2D {
    h: usize,
    w: usize,
    cells: Vec<u8>,
}

impl Config2D {
    pub fn new(h: usize, w: usize, cells: Vec<u8>) -> Result<Self> {
        if h == 0 || w == 0 {
            return Err(Error::invalid("grid", format!("{h}x{w} has no cells")));
        }
        if cells.len() != h * w {
            return Err(Error::invalid("grid", format!("{} cells for a {h}x{w} grid", cells.len())));
        }
        if cells.iter().any(|&v| v > 1) {
            return Err(Error::invalid("grid", "cell values must be 0 or 1"));
        }
        Ok(Config2D { h, w, cells })
    }

    pub fn zeros(h: usize, w: usize) -> Self {
        Config2D::new(h, w, vec![0; h * w]).expect("non-empty grid")
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.cells[y * self.w..(y + 1) * self.w]
    }

    /// Toroidal access.
    pub fn get(&self, y: i64, x: i64) -> u8 {
        let y = y.rem_euclid(self.h as i64) as usize;
        let x = x.rem_euclid(self.w as i64) as usize;
        self.cells[y * self.w + x]
    }

    pub fn set(&mut self, y: usize, x: usize, v: u8) {
        self.cells[y * self.w + x] = v & 1;
    }

    pub fn ones_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v == 1).count()
    }

    pub fn density(&self) -> f64 {
        self.ones_count() as f64 / self.cells.len() as f64
    }

    pub fn uniform_value(&self) -> Option<u8> {
        let first = self.cells[0];
        self.cells.iter().all(|&v| v == first).then_some(first)
    }

    /// Toroidal translation: the new cell `(y + dy, x + dx)` holds the old `(y, x)`.
    pub fn translate(&self, dy: i64, dx: i64) -> Config2D {
        let mut cells = vec![0u8; self.cells.len()];
        for y in 0..self.h {
            for x in 0..self.w {
                cells[y * self.w + x] = self.get(y as i64 - dy, x as i64 - dx);
            }
        }
        Config2D { h: self.h, w: self.w, cells }
    }
}

pub fn random_config2d(h: usize, w: usize, p: f64, seed: u64) -> Result<Config2D> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::range("probability", format!("p = {p} is outside [0, 1]")));
    }
    let mut rng = seed::rng(seed);
    let cells = (0..h * w).map(|_| u8::from(rng.random::<f64>() < p)).collect();
    Config2D::new(h, w, cells)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Neighborhood {
    /// Center plus the four orthogonal neighbors.
    VonNeumann5,
    /// The full 3x3 block.
    Moore9,
}

impl Neighborhood {
    pub fn offsets(self) -> Vec<(i32, i32)> {
        match self {
            Neighborhood::VonNeumann5 => vec![(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)],
            Neighborhood::Moore9 => (-1..=1).flat_map(|dy| (-1..=1).map(move |dx| (dy, dx))).collect(),
        }
    }

    pub fn size(self) -> usize {
        match self {
            Neighborhood::VonNeumann5 => 5,
            Neighborhood::Moore9 => 9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule2D {
    Totalistic { neighborhood: Neighborhood, code: u32 },
    SampledMajority { offsets: Vec<(i32, i32)> },
    Gkl2D,
}

pub fn make_totalistic2d(neighborhood: Neighborhood, code: u32) -> Result<Rule2D> {
    let bits = neighborhood.size() + 1;
    if code >> bits != 0 {
        return Err(Error::range(
            "totalistic code",
            format!("{code} needs more than {bits} bits for {neighborhood:?}"),
        ));
    }
    Ok(Rule2D::Totalistic { neighborhood, code })
}

pub fn make_sampled_majority2d(offsets: &[(i32, i32)]) -> Result<Rule2D> {
    if offsets.len().is_multiple_of(2) {
        return Err(Error::invalid(
            "majority offsets",
            format!("{} offsets: an odd count is required", offsets.len()),
        ));
    }
    for (i, o) in offsets.iter().enumerate() {
        if offsets[..i].contains(o) {
            return Err(Error::invalid("majority offsets", format!("duplicate offset {o:?}")));
        }
    }
    Ok(Rule2D::SampledMajority { offsets: offsets.to_vec() })
}

/// Center, north and east: the three-cell asymmetric majority.
pub const NORTH_EAST_CENTER: [(i32, i32); 3] = [(0, 0), (-1, 0), (0, 1)];

pub fn make_gkl2d() -> Rule2D {
    Rule2D::Gkl2D
}

/// Plus-shaped GKL analog on `(a, b, c, d, e) = (north, west, center, east, south)`:
/// a 0 center polls north and west, a 1 center polls east and south.
pub fn gkl2d_output(a: u8, b: u8, c: u8, d: u8, e: u8) -> u8 {
    let poll = if c == 0 { a + b } else { d + e };
    u8::from(poll + c >= 2)
}

impl Rule2D {
    /// Offsets read by the rule, in evaluation order.
    pub fn offsets(&self) -> Vec<(i32, i32)> {
        match self {
            Rule2D::Totalistic { neighborhood, .. } => neighborhood.offsets(),
            Rule2D::SampledMajority { offsets } => offsets.clone(),
            Rule2D::Gkl2D => Neighborhood::VonNeumann5.offsets(),
        }
    }

    /// Output given the values at [`Rule2D::offsets`].
    pub fn eval(&self, values: &[u8]) -> u8 {
        match self {
            Rule2D::Totalistic { code, .. } => {
                let total: u32 = values.iter().map(|&v| u32::from(v)).sum();
                ((code >> total) & 1) as u8
            }
            Rule2D::SampledMajority { offsets } => {
                let ones = values.iter().filter(|&&v| v == 1).count();
                u8::from(2 * ones > offsets.len())
            }
            Rule2D::Gkl2D => gkl2d_output(values[0], values[1], values[2], values[3], values[4]),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Rule2D::Totalistic { neighborhood, code } => {
                let nb = match neighborhood {
                    Neighborhood::VonNeumann5 => "vn5",
                    Neighborhood::Moore9 => "moore9",
                };
                format!("t2d:{nb}:{code}")
            }
            Rule2D::SampledMajority { offsets } => format!(
                "maj2d:{}",
                offsets.iter().map(|(dy, dx)| format!("{dy},{dx}")).collect::<Vec<_>>().join(";")
            ),
            Rule2D::Gkl2D => "gkl2d".to_string(),
        }
    }
}

/// The totalistic code of the strict majority over `size` cells.
pub fn majority_code(size: usize) -> u32 {
    (0..=size as u32).filter(|&t| 2 * t as usize > size).fold(0, |c, t| c | (1 << t))
}

/// Synchronous toroidal update, parallel over rows.
pub fn step_sync2d(config: &Config2D, rule: &Rule2D) -> Config2D {
    let mut next = vec![0u8; config.cells.len()];
    step2d_into(config, rule, &rule.offsets(), &mut next);
    Config2D { h: config.h, w: config.w, cells: next }
}

fn step2d_into(config: &Config2D, rule: &Rule2D, offsets: &[(i32, i32)], next: &mut [u8]) {
    let (h, w) = (config.h as i64, config.w as i64);
    next.par_chunks_mut(config.w).enumerate().for_each(|(y, row)| {
        let mut vals = vec![0u8; offsets.len()];
        let rows: Vec<&[u8]> = offsets
            .iter()
            .map(|&(dy, _)| config.row((y as i64 + dy as i64).rem_euclid(h) as usize))
            .collect();
        for (x, out) in row.iter_mut().enumerate() {
            for (j, &(_, dx)) in offsets.iter().enumerate() {
                vals[j] = rows[j][(x as i64 + dx as i64).rem_euclid(w) as usize];
            }
            *out = rule.eval(&vals);
        }
    });
}

pub fn evolve2d(config: &Config2D, rule: &Rule2D, steps: usize) -> Vec<Config2D> {
    let mut history = Vec::with_capacity(steps + 1);
    history.push(config.clone());
    for _ in 0..steps {
        let next = step_sync2d(history.last().expect("non-empty"), rule);
        history.push(next);
    }
    history
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome2D {
    Uniform { value: u8, step: usize },
    /// A non-uniform configuration that maps to itself.
    StuckFixed { step: usize },
    /// Still changing after the step budget (includes oscillation).
    Unsettled,
}

/// Evolve until the grid is uniform, stops changing, or `max_steps` elapse.
pub fn run2d(config: &Config2D, rule: &Rule2D, max_steps: usize) -> (Outcome2D, Config2D) {
    let offsets = rule.offsets();
    let mut cur = config.clone();
    let mut next = vec![0u8; cur.cells.len()];
    for step in 0..=max_steps {
        step2d_into(&cur, rule, &offsets, &mut next);
        let fixed = next == cur.cells;
        match (cur.uniform_value(), fixed) {
            (Some(value), true) => return (Outcome2D::Uniform { value, step }, cur),
            (None, true) => return (Outcome2D::StuckFixed { step }, cur),
            _ => {}
        }
        if step == max_steps {
            break;
        }
        std::mem::swap(&mut cur.cells, &mut next);
    }
    (Outcome2D::Unsettled, cur)
}

/// Row `row` of every grid in the history, oldest first.
pub fn spacetime_slice(history: &[Config2D], row: usize) -> Result<Vec<Vec<u8>>> {
    let Some(first) = history.first() else {
        return Ok(Vec::new());
    };
    if row >= first.h {
        return Err(Error::range("slice row", format!("{row} >= grid height {}", first.h)));
    }
    Ok(history.iter().map(|g| g.row(row).to_vec()).collect())
}

/// Mean density after `steps` steps for each initial density, over seeded trials.
/// Trial `t` at `p_values[i]` uses seed `derive_path(seed, [i, t])`.
pub fn final_density_curve2d(
    rule: &Rule2D,
    size: (usize, usize),
    steps: usize,
    p_values: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let (h, w) = size;
    p_values
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut total = 0.0;
            for t in 0..trials {
                let init = random_config2d(h, w, p, seed::derive_path(seed, &[i as u64, t as u64]))?;
                let (_, last) = run2d(&init, rule, steps);
                total += last.density();
            }
            Ok((p, total / trials.max(1) as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_patterns(k: usize) -> impl Iterator<Item = Vec<u8>> {
        (0..1usize << k).map(move |v| (0..k).map(|j| ((v >> j) & 1) as u8).collect())
    }

    #[test]
    fn code_56_is_five_cell_majority() {
        let r = make_totalistic2d(Neighborhood::VonNeumann5, 56).unwrap();
        assert_eq!(56, 0b111000);
        for p in all_patterns(5) {
            let ones = p.iter().filter(|&&v| v == 1).count();
            assert_eq!(r.eval(&p), u8::from(ones >= 3));
        }
        assert_eq!(majority_code(5), 56);
    }

    #[test]
    fn code_976_totals() {
        let r = make_totalistic2d(Neighborhood::Moore9, 976).unwrap();
        let ones: Vec<u32> = (0..=9).filter(|&t| (976 >> t) & 1 == 1).collect();
        assert_eq!(ones, vec![4, 6, 7, 8, 9]);
        assert_eq!(majority_code(9) ^ 976, (1 << 4) | (1 << 5));
        let zero = make_totalistic2d(Neighborhood::Moore9, 0).unwrap();
        for p in all_patterns(9).step_by(7) {
            assert_eq!(zero.eval(&p), 0);
            let t = p.iter().filter(|&&v| v == 1).count() as u32;
            assert_eq!(r.eval(&p), u8::from(ones.contains(&t)));
        }
    }

    #[test]
    fn totalistic_code_range() {
        assert!(make_totalistic2d(Neighborhood::VonNeumann5, 64).is_err());
        assert!(make_totalistic2d(Neighborhood::VonNeumann5, 63).is_ok());
        assert!(make_totalistic2d(Neighborhood::Moore9, 1024).is_err());
    }

    #[test]
    fn sampled_majority2d_cases() {
        let r = make_sampled_majority2d(&NORTH_EAST_CENTER).unwrap();
        for p in all_patterns(3) {
            let ones = p.iter().filter(|&&v| v == 1).count();
            assert_eq!(r.eval(&p), u8::from(ones >= 2));
        }
        assert!(make_sampled_majority2d(&[(0, 0), (1, 0)]).is_err());
        assert!(make_sampled_majority2d(&[(0, 0), (0, 0), (1, 0)]).is_err());
        let id = make_sampled_majority2d(&[(0, 0)]).unwrap();
        let g = random_config2d(7, 5, 0.5, 2).unwrap();
        assert_eq!(step_sync2d(&g, &id), g);
    }

    #[test]
    fn full_moore_sampling_equals_totalistic_majority() {
        let s = make_sampled_majority2d(&Neighborhood::Moore9.offsets()).unwrap();
        let t = make_totalistic2d(Neighborhood::Moore9, majority_code(9)).unwrap();
        let g = random_config2d(20, 17, 0.5, 11).unwrap();
        assert_eq!(step_sync2d(&g, &s), step_sync2d(&g, &t));
    }

    #[test]
    fn gkl2d_formula() {
        // (a, b, c, d, e) = (N, W, center, E, S)
        assert_eq!(gkl2d_output(1, 1, 0, 0, 0), 1);
        assert_eq!(gkl2d_output(0, 0, 0, 1, 1), 0);
        assert_eq!(gkl2d_output(0, 0, 0, 0, 0), 0);
        assert_eq!(gkl2d_output(0, 0, 1, 1, 0), 1);
        assert_eq!(gkl2d_output(1, 1, 1, 0, 0), 0);
        let r = make_gkl2d();
        assert_eq!(r.offsets(), vec![(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)]);
        assert_eq!(r.eval(&[1, 1, 0, 0, 0]), 1);
    }

    #[test]
    fn slice_extraction() {
        let g = random_config2d(4, 6, 0.5, 1).unwrap();
        let s = spacetime_slice(std::slice::from_ref(&g), 2).unwrap();
        assert_eq!(s, vec![g.row(2).to_vec()]);
        assert!(spacetime_slice(std::slice::from_ref(&g), 4).is_err());
        let z = Config2D::zeros(3, 3);
        let s = spacetime_slice(&evolve2d(&z, &make_gkl2d(), 4), 1).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.iter().flatten().all(|&v| v == 0));
    }

    #[test]
    fn curve_extremes() {
        let r = make_sampled_majority2d(&NORTH_EAST_CENTER).unwrap();
        let c = final_density_curve2d(&r, (16, 16), 20, &[0.0, 1.0], 3, 5).unwrap();
        assert_eq!(c, vec![(0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn translation_equivariance() {
        let g = random_config2d(9, 13, 0.4, 8).unwrap();
        for rule in [make_gkl2d(), make_totalistic2d(Neighborhood::Moore9, 976).unwrap()] {
            assert_eq!(step_sync2d(&g.translate(2, -5), &rule), step_sync2d(&g, &rule).translate(2, -5));
        }
    }
}

//! Multiway graphs over nondeterministic updates, and the causal graph of a
//! single asynchronous run.
//!
//! Nodes are canonical states (`n`-bit integers, bit `i` = cell `i`). Every
//! node is expanded at most once, breadth-first, so a state reached along
//! several histories appears once and its layer is the first generation in
//! which it was reached. Parallel histories between the same two states are
//! folded into one edge whose multiplicity counts them.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::PackedKernel;
use crate::error::{Error, Result};
use crate::rule::{Config1D, Rule1D, Stepper};
use crate::stochastic::{apply_block, BlockRule, UpdateEvent};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;
pub const MAX_MULTIWAY_CELLS: usize = 64;
pub const MAX_BLOCK_MULTIWAY_CELLS: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiwayGraph {
    n: usize,
    states: Vec<u64>,
    layers: Vec<usize>,
    expanded: Vec<bool>,
    /// `(from, to) -> multiplicity`, node indices into `states`.
    edges: BTreeMap<(usize, usize), u64>,
    truncated: bool,
}

impl MultiwayGraph {
    fn new(n: usize, initial: u64) -> Self {
        MultiwayGraph {
            n,
            states: vec![initial],
            layers: vec![0],
            expanded: vec![false],
            edges: BTreeMap::new(),
            truncated: false,
        }
    }

    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn layer(&self, node: usize) -> usize {
        self.layers[node]
    }

    pub fn index_of(&self, state: u64) -> Option<usize> {
        self.states.iter().position(|&s| s == state)
    }

    /// `(from, to, multiplicity)` in node-index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.edges.iter().map(|(&(a, b), &m)| (a, b, m))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn multiplicity(&self, from: u64, to: u64) -> u64 {
        match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => self.edges.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn out_multiplicity(&self, node: usize) -> u64 {
        self.edges.range((node, 0)..(node + 1, 0)).map(|(_, &m)| m).sum()
    }

    /// Set when the node budget stopped expansion early.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Expanded states with no outgoing edge.
    pub fn terminal_states(&self) -> Vec<u64> {
        let mut has_out = vec![false; self.states.len()];
        for &(a, _) in self.edges.keys() {
            has_out[a] = true;
        }
        let mut out: Vec<u64> = (0..self.states.len())
            .filter(|&i| self.expanded[i] && !has_out[i])
            .map(|i| self.states[i])
            .collect();
        out.sort_unstable();
        out
    }

    /// States not expanded because of the generation limit or the budget.
    pub fn frontier_states(&self) -> Vec<u64> {
        let mut out: Vec<u64> = (0..self.states.len()).filter(|&i| !self.expanded[i]).map(|i| self.states[i]).collect();
        out.sort_unstable();
        out
    }

    /// Render a state as a string of cells, cell 0 first.
    pub fn state_label(&self, state: u64) -> String {
        Config1D::from_state(state, self.n).to_string()
    }

    /// DOT with `penwidth` proportional to edge multiplicity; terminal nodes
    /// are drawn as double circles.
    pub fn to_dot(&self) -> String {
        let terminal: std::collections::HashSet<u64> = self.terminal_states().into_iter().collect();
        let mut out = String::from("digraph multiway {\n  node [shape=box, fontname=monospace];\n");
        for (i, &s) in self.states.iter().enumerate() {
            let shape = if terminal.contains(&s) { ", shape=doublecircle" } else { "" };
            let _ = writeln!(out, "  n{i} [label=\"{}\"{shape}];", self.state_label(s));
        }
        for (&(a, b), &m) in &self.edges {
            let _ = writeln!(out, "  n{a} -> n{b} [penwidth={m}, label=\"{m}\"];");
        }
        out.push_str("}\n");
        out
    }

    /// CSV rows `from,to,multiplicity` using state labels.
    pub fn edges_csv(&self) -> String {
        let mut out = String::from("from,to,multiplicity\n");
        for (&(a, b), &m) in &self.edges {
            let _ = writeln!(out, "{},{},{m}", self.state_label(self.states[a]), self.state_label(self.states[b]));
        }
        out
    }
}

/// Breadth-first expansion shared by all builders. `branch(state)` lists the
/// successor of every nondeterministic choice (duplicates allowed).
fn explore(
    n: usize,
    initial: u64,
    generations: Option<usize>,
    max_nodes: usize,
    mut branch: impl FnMut(u64) -> Vec<u64>,
) -> MultiwayGraph {
    let mut g = MultiwayGraph::new(n, initial);
    let mut index: HashMap<u64, usize> = HashMap::from([(initial, 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(node) = queue.pop_front() {
        let layer = g.layers[node];
        if generations.is_some_and(|gmax| layer >= gmax) {
            continue;
        }
        let children = branch(g.states[node]);
        let new_children = children.iter().filter(|c| !index.contains_key(c)).count();
        if g.states.len() + new_children > max_nodes {
            g.truncated = true;
            break;
        }
        g.expanded[node] = true;
        for child in children {
            let idx = *index.entry(child).or_insert_with(|| {
                g.states.push(child);
                g.layers.push(layer + 1);
                g.expanded.push(false);
                queue.push_back(g.states.len() - 1);
                g.states.len() - 1
            });
            *g.edges.entry((node, idx)).or_insert(0) += 1;
        }
    }
    g
}

fn check_cells(n: usize, limit: usize) -> Result<()> {
    if n == 0 || n > limit {
        return Err(Error::Capacity(format!("multiway graphs support 1..={limit} cells, got {n}")));
    }
    Ok(())
}

/// Each generation flips every single cell in turn, then applies one
/// synchronous rule step to the flipped state.
pub fn multiway_noise(rule: &Rule1D, initial: &Config1D, generations: usize, max_nodes: usize) -> Result<MultiwayGraph> {
    let n = initial.len();
    check_cells(n, MAX_MULTIWAY_CELLS)?;
    let kernel = PackedKernel::new(rule, n)?;
    Ok(explore(n, initial.to_state(), Some(generations), max_nodes, |s| {
        (0..n).map(|i| kernel.step(s ^ (1u64 << i))).collect()
    }))
}

/// Asynchronous single-cell updates; only updates that change the state
/// branch, so the terminal states are the asynchronous fixed points.
pub fn multiway_async_ca(
    rule: &Rule1D,
    initial: &Config1D,
    generations: Option<usize>,
    max_nodes: usize,
) -> Result<MultiwayGraph> {
    let n = initial.len();
    check_cells(n, MAX_MULTIWAY_CELLS)?;
    let stepper = Stepper::new(rule);
    Ok(explore(n, initial.to_state(), generations, max_nodes, |s| {
        let cells = Config1D::from_state(s, n).into_cells();
        (0..n)
            .filter(|&i| stepper.cell_output(&cells, i) != cells[i])
            .map(|i| s ^ (1u64 << i))
            .collect()
    }))
}

/// Every order of block updates on a line of at most
/// [`MAX_BLOCK_MULTIWAY_CELLS`] cells. Pair positions whose update leaves
/// the state unchanged do not branch.
pub fn multiway_async_block(rule: &BlockRule, initial: &Config1D) -> Result<MultiwayGraph> {
    let n = initial.len();
    check_cells(n, MAX_BLOCK_MULTIWAY_CELLS)?;
    Ok(explore(n, initial.to_state(), None, DEFAULT_NODE_BUDGET, |s| {
        let cells = Config1D::from_state(s, n).into_cells();
        (0..n.saturating_sub(1))
            .filter(|&i| rule.changes(cells[i], cells[i + 1]))
            .map(|i| {
                let mut c = cells.clone();
                apply_block(&mut c, rule, i);
                Config1D::new(c).expect("binary cells").to_state()
            })
            .collect()
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalGraph {
    pub events: Vec<UpdateEvent>,
    /// `dependencies[e]` lists the earlier events `e` reads from, ascending.
    pub dependencies: Vec<Vec<usize>>,
}

impl CausalGraph {
    pub fn edge_count(&self) -> usize {
        self.dependencies.iter().map(Vec::len).sum()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph causal {\n  node [shape=point];\n");
        for (e, deps) in self.dependencies.iter().enumerate() {
            for d in deps {
                let _ = writeln!(out, "  {d} -> {e};");
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Link every update event to the most recent earlier event that wrote each
/// cell it reads (the cells at `offsets` around it, cyclic on `n` cells).
pub fn causal_graph(updates: &[UpdateEvent], offsets: &[i32], n: usize) -> Result<CausalGraph> {
    if n == 0 {
        return Err(Error::invalid("cell count", "at least one cell is required"));
    }
    let mut last_writer: Vec<Option<usize>> = vec![None; n];
    let mut dependencies = Vec::with_capacity(updates.len());
    for (e, ev) in updates.iter().enumerate() {
        if ev.cell >= n {
            return Err(Error::invalid("update log", format!("cell {} outside 0..{n}", ev.cell)));
        }
        let mut deps: Vec<usize> = offsets
            .iter()
            .filter_map(|&o| last_writer[(ev.cell as i64 + o as i64).rem_euclid(n as i64) as usize])
            .collect();
        deps.sort_unstable();
        deps.dedup();
        dependencies.push(deps);
        last_writer[ev.cell] = Some(e);
    }
    Ok(CausalGraph { events: updates.to_vec(), dependencies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::{identity_rule, make_elementary_rule};

    #[test]
    fn identity_noise_is_hypercube_neighbors() {
        let g = multiway_noise(&identity_rule(), &Config1D::zeros(3), 1, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(g.node_count(), 4);
        for s in [1u64, 2, 4] {
            assert_eq!(g.multiplicity(0, s), 1);
            assert_eq!(g.layer(g.index_of(s).unwrap()), 1);
        }
        assert_eq!(g.out_multiplicity(0), 3);
    }

    #[test]
    fn zero_generations_is_a_single_node() {
        let g = multiway_noise(&make_elementary_rule(232).unwrap(), &Config1D::parse("0110").unwrap(), 0, 10).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.frontier_states(), vec![0b0110]);
    }

    #[test]
    fn budget_truncates() {
        let g = multiway_noise(&identity_rule(), &Config1D::zeros(6), 6, 10).unwrap();
        assert!(g.truncated());
        assert!(g.node_count() <= 10);
    }

    #[test]
    fn sort_from_1010_has_one_terminal() {
        let g = multiway_async_block(&BlockRule::sort(), &Config1D::parse("1010").unwrap()).unwrap();
        assert_eq!(g.terminal_states(), vec![Config1D::parse("0011").unwrap().to_state()]);
        let sorted = Config1D::parse("0011").unwrap();
        let g = multiway_async_block(&BlockRule::sort(), &sorted).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.terminal_states(), vec![sorted.to_state()]);
        assert!(multiway_async_block(&BlockRule::sort(), &Config1D::zeros(15)).is_err());
    }

    #[test]
    fn async_ca_trivial_cases() {
        let r232 = make_elementary_rule(232).unwrap();
        let g = multiway_async_ca(&r232, &Config1D::ones(6), None, 100).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.terminal_states(), vec![0b111111]);
        let c = Config1D::parse("0110101").unwrap();
        let g = multiway_async_ca(&identity_rule(), &c, None, 100).unwrap();
        assert_eq!(g.terminal_states(), vec![c.to_state()]);
    }

    #[test]
    fn async_ca_is_not_confluent_for_232() {
        let g = multiway_async_ca(&make_elementary_rule(232).unwrap(), &Config1D::parse("0101").unwrap(), None, 100).unwrap();
        assert!(g.terminal_states().len() > 1);
    }

    #[test]
    fn causal_graph_definitions() {
        let one = [UpdateEvent { row: 1, cell: 3 }];
        assert_eq!(causal_graph(&one, &[-1, 0, 1], 10).unwrap().edge_count(), 0);
        let two = [UpdateEvent { row: 1, cell: 3 }, UpdateEvent { row: 1, cell: 3 }];
        assert_eq!(causal_graph(&two, &[-1, 0, 1], 10).unwrap().dependencies[1], vec![0]);
        let bad = [UpdateEvent { row: 1, cell: 10 }];
        assert!(causal_graph(&bad, &[0], 10).is_err());
    }

    #[test]
    fn dot_has_penwidth() {
        let g = multiway_noise(&make_elementary_rule(232).unwrap(), &Config1D::zeros(3), 2, 100).unwrap();
        let dot = g.to_dot();
        assert!(dot.contains("penwidth=3"));
        assert!(g.edges_csv().starts_with("from,to,multiplicity\n000,000,3\n"));
    }
}

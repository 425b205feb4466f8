//! Majority automata on undirected graphs.
//!
//! A node cannot tell neighbors apart, so rules here are totalistic over
//! geodesic shells: for each distance `d <= R` the rule only sees how many
//! nodes at exactly that distance hold each value. [`ShellRule`] weighs the
//! shells and compares the weighted count of 1s against that of 0s; an exact
//! tie keeps the node's own value.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::TransitionGraph;
use crate::error::{Error, Result};
use crate::seed;

pub const MAX_GRAPH_STG_NODES: usize = 20;

/// Simple undirected graph: no self-loops, no multi-edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeGraph {
    adj: Vec<Vec<usize>>,
}

impl NodeGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid("edge", format!("({u}, {v}) references a node outside 0..{n}")));
            }
            if u == v {
                return Err(Error::invalid("edge", format!("self-loop at node {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::invalid("edge", format!("duplicate edge ({u}, {v})")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(NodeGraph { adj })
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adj.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn empty(n: usize) -> Self {
        NodeGraph { adj: vec![Vec::new(); n] }
    }

    /// Cycle 0 - 1 - ... - (n-1) - 0.
    pub fn ring(n: usize) -> Result<Self> {
        match n {
            0 => Err(Error::invalid("ring", "at least one node is required")),
            1 => Ok(NodeGraph::empty(1)),
            2 => NodeGraph::new(2, &[(0, 1)]),
            _ => NodeGraph::new(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()),
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        NodeGraph::new(n, &edges).expect("complete graph edges are simple")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        NodeGraph::new(n, &edges).expect("path edges are simple")
    }

    /// `h x w` grid, nodes numbered row-major; `periodic` wraps both axes.
    pub fn lattice(h: usize, w: usize, periodic: bool) -> Result<Self> {
        let mut edges = HashSet::new();
        let id = |y: usize, x: usize| y * w + x;
        for y in 0..h {
            for x in 0..w {
                let right = if x + 1 < w { Some(x + 1) } else if periodic && w > 2 { Some(0) } else { None };
                let down = if y + 1 < h { Some(y + 1) } else if periodic && h > 2 { Some(0) } else { None };
                if let Some(nx) = right {
                    let (a, b) = (id(y, x), id(y, nx));
                    edges.insert((a.min(b), a.max(b)));
                }
                if let Some(ny) = down {
                    let (a, b) = (id(y, x), id(ny, x));
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
        let mut edges: Vec<_> = edges.into_iter().collect();
        edges.sort_unstable();
        NodeGraph::new(h * w, &edges)
    }

    /// Erdős–Rényi G(n, m): `m` distinct edges chosen uniformly.
    pub fn gnm(n: usize, m: usize, seed: u64) -> Result<Self> {
        let max = n * n.saturating_sub(1) / 2;
        if m > max {
            return Err(Error::range("edge count", format!("{m} > {max} possible edges on {n} nodes")));
        }
        let mut rng = seed::rng(seed);
        let mut chosen = HashSet::new();
        let mut edges = Vec::with_capacity(m);
        while edges.len() < m {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v && chosen.insert((u.min(v), u.max(v))) {
                edges.push((u.min(v), u.max(v)));
            }
        }
        NodeGraph::new(n, &edges)
    }

    /// Uniform-ish random `k`-regular simple graph by randomized pairing
    /// with restarts.
    pub fn random_regular(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k >= n || (n * k) % 2 == 1 {
            return Err(Error::invalid("regular graph", format!("no simple {k}-regular graph on {n} nodes")));
        }
        let mut rng = seed::rng(seed);
        'attempt: for _ in 0..10_000 {
            let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
            let mut edges = HashSet::new();
            while !stubs.is_empty() {
                let mut placed = false;
                for _ in 0..100 {
                    let i = rng.random_range(0..stubs.len());
                    let j = rng.random_range(0..stubs.len());
                    let (u, v) = (stubs[i], stubs[j]);
                    if i == j || u == v || edges.contains(&(u.min(v), u.max(v))) {
                        continue;
                    }
                    edges.insert((u.min(v), u.max(v)));
                    let (hi, lo) = (i.max(j), i.min(j));
                    stubs.swap_remove(hi);
                    stubs.swap_remove(lo);
                    placed = true;
                    break;
                }
                if !placed {
                    continue 'attempt;
                }
            }
            let mut edges: Vec<_> = edges.into_iter().collect();
            edges.sort_unstable();
            return NodeGraph::new(n, &edges);
        }
        Err(Error::Capacity(format!("failed to sample a {k}-regular graph on {n} nodes")))
    }

    /// Parse "u v" pairs, one per line; blank lines and `#` comments are
    /// skipped. The node count is one more than the largest id unless a
    /// `# nodes N` line says otherwise.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut declared = None;
        let mut max_id = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(n) = rest.trim().strip_prefix("nodes") {
                    declared = Some(n.trim().parse::<usize>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let ids: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("line {}: {t:?}: {e}", lineno + 1))))
                .collect::<Result<_>>()?;
            let [u, v] = ids[..] else {
                return Err(Error::Parse(format!("line {}: expected two node ids", lineno + 1)));
            };
            max_id = Some(max_id.unwrap_or(0).max(u).max(v));
            edges.push((u, v));
        }
        let n = declared.unwrap_or(max_id.map_or(0, |m| m + 1));
        NodeGraph::new(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# nodes {}\n", self.node_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Undirected DOT; node fill shows the value when `values` is given.
    pub fn to_dot(&self, values: Option<&[u8]>) -> String {
        let mut out = String::from("graph g {\n  node [shape=circle, style=filled];\n");
        for v in 0..self.node_count() {
            let color = match values.map(|vals| vals[v]) {
                Some(1) => "#d62728",
                Some(_) => "#ffd92f",
                None => "#ffffff",
            };
            let _ = writeln!(out, "  {v} [fillcolor=\"{color}\"];");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {u} -- {v};");
        }
        out.push_str("}\n");
        out
    }

    /// Parse the subset of DOT written by [`NodeGraph::to_dot`]: `a -- b`
    /// edge statements and bare node statements.
    pub fn from_dot(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_id: Option<usize> = None;
        for stmt in text.split([';', '\n']) {
            let stmt = stmt.trim();
            if stmt.is_empty() || stmt.starts_with("graph") || stmt.starts_with("node") || stmt == "}" {
                continue;
            }
            let head = stmt.split('[').next().unwrap_or("").trim();
            let ids: Vec<usize> = head
                .split("--")
                .map(|t| t.trim().trim_matches('"').parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<_>>()?;
            for &id in &ids {
                max_id = Some(max_id.map_or(id, |m| m.max(id)));
            }
            edges.extend(ids.windows(2).map(|w| (w[0], w[1])));
        }
        NodeGraph::new(max_id.map_or(0, |m| m + 1), &edges)
    }
}

/// Nodes at each exact distance `0..=radius` from `node`, each shell sorted.
pub fn geodesic_shells(graph: &NodeGraph, node: usize, radius: usize) -> Result<Vec<Vec<usize>>> {
    if node >= graph.node_count() {
        return Err(Error::invalid("node", format!("{node} is not in 0..{}", graph.node_count())));
    }
    let mut dist: HashMap<usize, usize> = HashMap::from([(node, 0)]);
    let mut shells = vec![vec![node]];
    let mut queue = VecDeque::from([node]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        if d == radius {
            continue;
        }
        for &v in graph.neighbors(u) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(v) {
                e.insert(d + 1);
                if shells.len() <= d + 1 {
                    shells.push(Vec::new());
                }
                shells[d + 1].push(v);
                queue.push_back(v);
            }
        }
    }
    shells.resize(radius + 1, Vec::new());
    for s in &mut shells {
        s.sort_unstable();
    }
    Ok(shells)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellRule {
    radius: usize,
    weights: Vec<Ratio<u64>>,
}

impl ShellRule {
    /// Unit weight on every shell `0..=radius`.
    pub fn majority(radius: usize) -> Result<Self> {
        ShellRule::weighted(radius, vec![Ratio::from_integer(1); radius + 1])
    }

    pub fn weighted(radius: usize, weights: Vec<Ratio<u64>>) -> Result<Self> {
        if radius == 0 {
            return Err(Error::range("shell radius", "radius must be at least 1"));
        }
        if weights.len() != radius + 1 {
            return Err(Error::invalid(
                "shell weights",
                format!("{} weights for radius {radius}; need one per shell 0..={radius}", weights.len()),
            ));
        }
        if weights.iter().any(|w| *w.denom() == 0) {
            return Err(Error::invalid("shell weights", "zero denominator"));
        }
        Ok(ShellRule { radius, weights })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn weights(&self) -> &[Ratio<u64>] {
        &self.weights
    }

    pub fn label(&self) -> String {
        if self.weights.iter().all(|w| *w == Ratio::from_integer(1)) {
            format!("shell:{}", self.radius)
        } else {
            format!(
                "shell:{}:{}",
                self.radius,
                self.weights.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
            )
        }
    }

    /// Weights scaled to integers over a common denominator.
    fn integer_weights(&self) -> Vec<u64> {
        let lcm = self.weights.iter().fold(1u64, |l, w| num_lcm(l, *w.denom()));
        self.weights.iter().map(|w| w.numer() * (lcm / w.denom())).collect()
    }
}

fn num_lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// A graph with its shells precomputed for a particular rule.
#[derive(Clone, Debug)]
pub struct GraphAutomaton {
    graph: NodeGraph,
    rule: ShellRule,
    /// Per node, per shell distance, the member nodes.
    shells: Vec<Vec<Vec<usize>>>,
    weights: Vec<u64>,
}

impl GraphAutomaton {
    pub fn new(graph: NodeGraph, rule: ShellRule) -> Self {
        let shells = (0..graph.node_count())
            .map(|v| geodesic_shells(&graph, v, rule.radius).expect("node in range"))
            .collect();
        let weights = rule.integer_weights();
        GraphAutomaton { graph, rule, shells, weights }
    }

    pub fn graph(&self) -> &NodeGraph {
        &self.graph
    }

    pub fn rule(&self) -> &ShellRule {
        &self.rule
    }

    fn node_update(&self, v: usize, values: &[u8]) -> u8 {
        let (mut ones, mut zeros) = (0u64, 0u64);
        for (shell, &w) in self.shells[v].iter().zip(&self.weights) {
            let k = shell.iter().filter(|&&u| values[u] == 1).count() as u64;
            ones += w * k;
            zeros += w * (shell.len() as u64 - k);
        }
        match ones.cmp(&zeros) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => values[v],
        }
    }

    pub fn step(&self, values: &[u8]) -> Vec<u8> {
        assert_eq!(values.len(), self.graph.node_count());
        (0..values.len()).map(|v| self.node_update(v, values)).collect()
    }

    /// Successor map over all `2^n` assignments (bit i = node i).
    pub fn stg(&self) -> Result<TransitionGraph> {
        let n = self.graph.node_count();
        if n > MAX_GRAPH_STG_NODES {
            return Err(Error::Capacity(format!("{n} nodes exceeds the graph STG limit of {MAX_GRAPH_STG_NODES}")));
        }
        let masks: Vec<Vec<(u32, u32)>> = self
            .shells
            .iter()
            .map(|node| node.iter().map(|s| (s.iter().fold(0u32, |m, &u| m | 1 << u), s.len() as u32)).collect())
            .collect();
        let successor: Vec<u32> = (0..1u32 << n)
            .into_par_iter()
            .map(|state| {
                let mut next = 0u32;
                for (v, node) in masks.iter().enumerate() {
                    let (mut ones, mut zeros) = (0u64, 0u64);
                    for (&(mask, size), &w) in node.iter().zip(&self.weights) {
                        let k = (state & mask).count_ones();
                        ones += w * u64::from(k);
                        zeros += w * u64::from(size - k);
                    }
                    let bit = match ones.cmp(&zeros) {
                        std::cmp::Ordering::Greater => 1,
                        std::cmp::Ordering::Less => 0,
                        std::cmp::Ordering::Equal => (state >> v) & 1,
                    };
                    next |= bit << v;
                }
                next
            })
            .collect();
        TransitionGraph::from_successors(n, successor)
    }

    /// Run until a repeated assignment. Returns the uniform value if the run
    /// settled on a uniform fixed point.
    pub fn settle(&self, values: &[u8], max_steps: usize) -> Option<u8> {
        let mut seen = HashSet::new();
        let mut cur = values.to_vec();
        for _ in 0..=max_steps {
            let next = self.step(&cur);
            if next == cur {
                let first = cur[0];
                return cur.iter().all(|&x| x == first).then_some(first);
            }
            if !seen.insert(cur) {
                return None;
            }
            cur = next;
        }
        None
    }
}

pub fn step_graph(graph: &NodeGraph, values: &[u8], rule: &ShellRule) -> Vec<u8> {
    GraphAutomaton::new(graph.clone(), rule.clone()).step(values)
}

pub fn graph_stg(graph: &NodeGraph, rule: &ShellRule) -> Result<TransitionGraph> {
    GraphAutomaton::new(graph.clone(), rule.clone()).stg()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuccessRate {
    pub successes: usize,
    /// Trials with a strict initial majority.
    pub counted: usize,
    pub ties_excluded: usize,
}

impl SuccessRate {
    pub fn rate(&self) -> f64 {
        if self.counted == 0 {
            0.0
        } else {
            self.successes as f64 / self.counted as f64
        }
    }
}

/// Safety cap on synchronous steps per trial; majority dynamics on finite
/// graphs settle into period 1 or 2 long before this.
pub const SETTLE_CAP: usize = 10_000;

/// Success rate on a fixed graph. Trial `t` draws its values from seed
/// `derive(derive(seed, t), 0)`.
pub fn graph_success_rate(graph: &NodeGraph, rule: &ShellRule, trials: usize, p: f64, seed: u64) -> Result<SuccessRate> {
    let automaton = GraphAutomaton::new(graph.clone(), rule.clone());
    success_rate_with(|_| Ok(automaton.clone()), trials, p, seed)
}

/// Success rate with a fresh graph per trial. `make(graph_seed)` receives
/// `derive(derive(seed, t), 1)`; values use the same seeds as
/// [`graph_success_rate`], so runs with the same `seed` are paired.
pub fn graph_family_success_rate(
    make: impl Fn(u64) -> Result<NodeGraph> + Sync,
    rule: &ShellRule,
    trials: usize,
    p: f64,
    seed: u64,
) -> Result<SuccessRate> {
    success_rate_with(|s| Ok(GraphAutomaton::new(make(s)?, rule.clone())), trials, p, seed)
}

fn success_rate_with(
    automaton_for: impl Fn(u64) -> Result<GraphAutomaton> + Sync,
    trials: usize,
    p: f64,
    seed: u64,
) -> Result<SuccessRate> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::range("probability", format!("p = {p} is outside [0, 1]")));
    }
    let results: Vec<Option<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = seed::derive(seed, t as u64);
            let automaton = automaton_for(seed::derive(trial_seed, 1))?;
            let n = automaton.graph.node_count();
            let mut rng = seed::rng(seed::derive(trial_seed, 0));
            let values: Vec<u8> = (0..n).map(|_| u8::from(rng.random::<f64>() < p)).collect();
            let ones = values.iter().filter(|&&v| v == 1).count();
            if 2 * ones == n {
                return Ok(None);
            }
            let majority = u8::from(2 * ones > n);
            Ok(Some(automaton.settle(&values, SETTLE_CAP) == Some(majority)))
        })
        .collect::<Result<_>>()?;
    let mut rate = SuccessRate { successes: 0, counted: 0, ties_excluded: 0 };
    for r in results {
        match r {
            None => rate.ties_excluded += 1,
            Some(ok) => {
                rate.counted += 1;
                rate.successes += usize::from(ok);
            }
        }
    }
    Ok(rate)
}

/// Random relabeling of nodes, used to check automorphism equivariance.
pub fn permuted(graph: &NodeGraph, seed: u64) -> (NodeGraph, Vec<usize>) {
    let mut perm: Vec<usize> = (0..graph.node_count()).collect();
    perm.shuffle(&mut seed::rng(seed));
    let edges: Vec<_> = graph.edges().into_iter().map(|(u, v)| (perm[u], perm[v])).collect();
    (NodeGraph::new(graph.node_count(), &edges).expect("relabeling keeps the graph simple"), perm)
}

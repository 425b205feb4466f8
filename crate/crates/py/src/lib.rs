//! Python bindings: rules, configurations and the main experiments.
//!
//! Configurations cross the boundary as `0`/`1` strings.

use ca_consensus::analysis::{adversarial_flip_search, build_stg, classify_states};
use ca_consensus::graph::{graph_family_success_rate, graph_success_rate, NodeGraph, ShellRule};
use ca_consensus::multiway::multiway_async_block;
use ca_consensus::rulespec::RuleSpec;
use ca_consensus::search::{score_rule, Metric, ScoreSpec};
use ca_consensus::stochastic::{async_final_density_curve, evolve_async, phase_diagram, BlockRule};
use ca_consensus::{rule, Config1D, Error, Rule1D};
use pyo3::exceptions::{PyMemoryError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Capacity(msg) => PyMemoryError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_config(s: &str) -> PyResult<Config1D> {
    Config1D::parse(s).map_err(py_err)
}

/// A one-dimensional rule on a cyclic ring.
#[pyclass(name = "Rule", frozen)]
struct PyRule {
    inner: Rule1D,
}

#[pymethods]
impl PyRule {
    /// Parse a rule spelling such as `e232`, `gkl` or `r2:4272826020`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let inner = spec.parse::<RuleSpec>().and_then(RuleSpec::one_d).map_err(py_err)?;
        Ok(PyRule { inner })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    #[getter]
    fn number(&self) -> Option<u128> {
        self.inner.number()
    }

    #[getter]
    fn offsets(&self) -> Vec<i32> {
        self.inner.offsets().to_vec()
    }

    #[getter]
    fn table(&self) -> Vec<u32> {
        self.inner.table().iter().map(|&v| u32::from(v)).collect()
    }

    /// Output for a neighborhood pattern listed in offset order.
    fn apply(&self, pattern: Vec<u8>) -> PyResult<u8> {
        if pattern.len() != self.inner.offsets().len() || pattern.iter().any(|&v| v > 1) {
            return Err(PyValueError::new_err("pattern must hold one 0/1 value per offset"));
        }
        Ok(self.inner.apply(&pattern))
    }

    fn is_self_complementary(&self) -> bool {
        self.inner.is_self_complementary()
    }

    /// Synchronous history of `steps` steps, initial row included.
    fn evolve(&self, config: &str, steps: usize) -> PyResult<Vec<String>> {
        let c = parse_config(config)?;
        Ok(rule::evolve(&c, &self.inner, steps).iter().map(ToString::to_string).collect())
    }

    /// Random-sequential history, one string per rendered row.
    fn evolve_async(&self, config: &str, updates_per_row: usize, rows: usize, seed: u64) -> PyResult<Vec<String>> {
        let c = parse_config(config)?;
        let h = evolve_async(&c, &self.inner, updates_per_row, rows, seed).map_err(py_err)?;
        Ok(h.rows.iter().map(ToString::to_string).collect())
    }

    fn __repr__(&self) -> String {
        format!("Rule({:?})", self.inner.label())
    }
}

/// Cyclic 0/1 configuration drawn with each cell 1 with probability `p`.
#[pyfunction]
fn random_config(n: usize, p: f64, seed: u64) -> PyResult<String> {
    Ok(rule::random_config(n, p, seed).map_err(py_err)?.to_string())
}

/// Classify every state of an `n`-cell ring; returns verdict counts.
#[pyfunction]
fn classify<'py>(py: Python<'py>, rule: PyRef<'_, PyRule>, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = &rule.inner;
    let stg = py.detach(|| build_stg(r, n)).map_err(py_err)?;
    let report = classify_states(&stg);
    let d = PyDict::new(py);
    d.set_item("correct", report.counts.correct)?;
    d.set_item("wrong", report.counts.wrong)?;
    d.set_item("stuck", report.counts.stuck)?;
    d.set_item("tie", report.counts.tie)?;
    d.set_item("attractors", stg.attractors().len())?;
    Ok(d)
}

/// Mean final density for every (p, q) pair, as rows over `p_grid`.
#[pyfunction]
#[pyo3(signature = (rule, n, steps, p_grid, q_grid, trials, seed=0))]
#[allow(clippy::too_many_arguments)]
fn phase(
    py: Python<'_>,
    rule: PyRef<'_, PyRule>,
    n: usize,
    steps: usize,
    p_grid: Vec<f64>,
    q_grid: Vec<f64>,
    trials: usize,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let r = &rule.inner;
    let d = py.detach(|| phase_diagram(r, n, steps, &p_grid, &q_grid, trials, seed)).map_err(py_err)?;
    Ok(d.mean)
}

/// `(p, mean, std_err)` triples of the asynchronous final-density curve.
#[pyfunction]
#[pyo3(signature = (rule, n, rows, p_values, trials, updates_per_row=None, seed=0))]
#[allow(clippy::too_many_arguments)]
fn async_curve(
    py: Python<'_>,
    rule: PyRef<'_, PyRule>,
    n: usize,
    rows: usize,
    p_values: Vec<f64>,
    trials: usize,
    updates_per_row: Option<usize>,
    seed: u64,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let r = &rule.inner;
    let upr = updates_per_row.unwrap_or(2 * n);
    let curve = py.detach(|| async_final_density_curve(r, n, rows, upr, &p_values, trials, seed)).map_err(py_err)?;
    Ok(curve.iter().map(|c| (c.p, c.mean, c.std_err)).collect())
}

/// `(exact-consensus rate, majority-agreement fraction)` under a regime:
/// `"sync"`, `"async"` or `"noisy"` (with `q`).
#[pyfunction]
#[pyo3(signature = (rule, regime, n, steps, trials, seed=0, q=0.0, p_values=None))]
#[allow(clippy::too_many_arguments)]
fn score(
    py: Python<'_>,
    rule: PyRef<'_, PyRule>,
    regime: &str,
    n: usize,
    steps: usize,
    trials: usize,
    seed: u64,
    q: f64,
    p_values: Option<Vec<f64>>,
) -> PyResult<(f64, f64)> {
    let mut spec = match regime {
        "sync" => ScoreSpec::sync(n, steps, trials, seed),
        "async" => ScoreSpec::asynchronous(n, steps, trials, seed).with_metric(Metric::ExactConsensus),
        "noisy" => ScoreSpec::noisy(n, steps, q, trials, seed),
        other => return Err(PyValueError::new_err(format!("unknown regime {other:?}"))),
    };
    if let Some(p) = p_values {
        spec = spec.with_p_values(p);
    }
    let r = &rule.inner;
    let res = py.detach(|| score_rule(r, &spec)).map_err(py_err)?;
    Ok((res.metric_exact, res.metric_agree))
}

/// Terminal states of every order of sorting-rule pair updates on a line.
#[pyfunction]
fn sort_terminals(init: &str) -> PyResult<Vec<String>> {
    let g = multiway_async_block(&BlockRule::sort(), &parse_config(init)?).map_err(py_err)?;
    Ok(g.terminal_states().iter().map(|&s| g.state_label(s)).collect())
}

/// Shell-majority success rate on a ring (`"ring"`) or on fresh random
/// `k`-regular graphs (`"regular"`), with paired seeds.
#[pyfunction]
#[pyo3(signature = (kind, n, p, trials, radius=1, k=4, seed=0))]
fn graph_success(kind: &str, n: usize, p: f64, trials: usize, radius: usize, k: usize, seed: u64) -> PyResult<f64> {
    let rule = ShellRule::majority(radius).map_err(py_err)?;
    let rate = match kind {
        "ring" => graph_success_rate(&NodeGraph::ring(n).map_err(py_err)?, &rule, trials, p, seed),
        "regular" => graph_family_success_rate(|s| NodeGraph::random_regular(n, k, s), &rule, trials, p, seed),
        other => return Err(PyValueError::new_err(format!("unknown graph kind {other:?}"))),
    }
    .map_err(py_err)?;
    Ok(rate.rate())
}

/// Smallest flip set changing the outcome, or `None`.
#[pyfunction]
#[pyo3(signature = (rule, config, max_flips=2, max_steps=500))]
fn attack(rule: PyRef<'_, PyRule>, config: &str, max_flips: usize, max_steps: usize) -> PyResult<Option<Vec<usize>>> {
    let r = adversarial_flip_search(&rule.inner, &parse_config(config)?, max_flips, max_steps).map_err(py_err)?;
    Ok(r.flips)
}

#[pymodule]
fn ca_consensus_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRule>()?;
    m.add_function(wrap_pyfunction!(random_config, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(phase, m)?)?;
    m.add_function(wrap_pyfunction!(async_curve, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(sort_terminals, m)?)?;
    m.add_function(wrap_pyfunction!(graph_success, m)?)?;
    m.add_function(wrap_pyfunction!(attack, m)?)?;
    Ok(())
}

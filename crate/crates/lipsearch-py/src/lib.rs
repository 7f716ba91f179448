//! Python bindings. All quantities cross the boundary as exact rational
//! strings ("3/10", "0.3", "1/3"); `fractions.Fraction` parses the output
//! form directly. Floats are rejected on input so no precision is lost.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lipsearch::model::Observation;
use lipsearch::rational::{from_int, parse_rat, render_fraction, Rat};
use lipsearch::sim::Trace;
use lipsearch::{
    oracle, policy, two_period, DiscreteInstance, History, LeftToRight, PolicyAction,
    RiskClass, ScriptedPolicy,
};

fn to_py(e: lipsearch::Error) -> PyErr {
    match e {
        lipsearch::Error::BudgetExceeded { .. } | lipsearch::Error::NonTerminating { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn rat(text: &str) -> PyResult<Rat> {
    parse_rat(text).map_err(to_py)
}

fn frac(r: &Rat) -> String {
    render_fraction(r)
}

/// Builds a unit-Lipschitz history from (location, quality) string pairs.
/// The cost only matters to the policy functions, not to the geometry.
fn history(cost: Rat, observations: Vec<(String, String)>) -> PyResult<History> {
    let obs = observations
        .iter()
        .map(|(x, z)| Ok(Observation::new(rat(x)?, rat(z)?)))
        .collect::<PyResult<Vec<_>>>()?;
    History::new(cost, from_int(1), obs).map_err(to_py)
}

fn trace_dict<'py>(py: Python<'py>, trace: &Trace) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("c", frac(&trace.cost))?;
    out.set_item("L", frac(&trace.lipschitz))?;
    let steps = trace
        .steps
        .iter()
        .map(|s| {
            let step = PyDict::new(py);
            step.set_item("t", s.t)?;
            step.set_item("x", frac(&s.x))?;
            step.set_item("z", frac(&s.z))?;
            step.set_item("window_measure_before", frac(&s.window_measure_before))?;
            step.set_item("threshold", s.threshold.as_ref().map(frac))?;
            step.set_item("action", "search")?;
            Ok(step)
        })
        .collect::<PyResult<Vec<_>>>()?;
    out.set_item("steps", steps)?;
    let terminal = PyDict::new(py);
    terminal.set_item("adopted_quality", frac(&trace.terminal.adopted_quality))?;
    terminal.set_item("searches_paid", trace.terminal.searches_paid)?;
    terminal.set_item("payoff", frac(&trace.terminal.payoff))?;
    out.set_item("terminal", terminal)?;
    Ok(out)
}

/// A piecewise-linear quality landscape on [0, 1] that attains 1 somewhere.
#[pyclass(name = "QualityIndex", frozen)]
struct PyQualityIndex {
    inner: lipsearch::QualityIndex,
}

#[pymethods]
impl PyQualityIndex {
    #[new]
    #[pyo3(signature = (breakpoints, lipschitz=None))]
    fn new(breakpoints: Vec<(String, String)>, lipschitz: Option<String>) -> PyResult<Self> {
        let pts = breakpoints
            .iter()
            .map(|(x, q)| Ok((rat(x)?, rat(q)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let l = rat(lipschitz.as_deref().unwrap_or("1"))?;
        Ok(PyQualityIndex {
            inner: lipsearch::QualityIndex::new(l, pts).map_err(to_py)?,
        })
    }

    /// A tent landscape: slope up to quality 1 at `peak`, slope down after.
    #[staticmethod]
    fn tent(peak: &str) -> PyResult<Self> {
        Ok(PyQualityIndex {
            inner: lipsearch::index::tent(from_int(1), rat(peak)?).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyQualityIndex {
            inner: lipsearch::QualityIndex::from_json_str(text).map_err(to_py)?,
        })
    }

    fn evaluate(&self, x: &str) -> PyResult<String> {
        Ok(frac(&self.inner.evaluate(&rat(x)?)))
    }

    fn breakpoints(&self) -> Vec<(String, String)> {
        self.inner
            .breakpoints()
            .iter()
            .map(|(x, q)| (frac(x), frac(q)))
            .collect()
    }

    fn lipschitz(&self) -> String {
        frac(self.inner.lipschitz())
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!("QualityIndex(breakpoints={})", self.inner.breakpoints().len())
    }
}

/// Maximum number of further searches at cost `c` with window measure `l`.
#[pyfunction]
fn max_searches(c: &str, l: &str) -> PyResult<u32> {
    policy::max_searches(&rat(c)?, &rat(l)?).map_err(to_py)
}

/// The stopping threshold phi(l).
#[pyfunction]
fn stop_threshold(c: &str, l: &str) -> PyResult<String> {
    Ok(frac(&policy::stop_threshold(&rat(c)?, &rat(l)?).map_err(to_py)?))
}

/// phi(1) - c, the worst-case payoff guarantee from a fresh start.
#[pyfunction]
fn root_guarantee(c: &str) -> PyResult<String> {
    Ok(frac(&policy::root_guarantee(&rat(c)?).map_err(to_py)?))
}

/// Ball diameters and centers partitioning an ordered window of measure `l`.
#[pyfunction]
fn ball_partition(c: &str, l: &str) -> PyResult<(Vec<String>, Vec<String>)> {
    let p = policy::ball_partition(&rat(c)?, &rat(l)?).map_err(to_py)?;
    Ok((
        p.diameters.iter().map(frac).collect(),
        p.centers.iter().map(frac).collect(),
    ))
}

/// The left-to-right policy's move after the given observations: a location
/// string, or None to stop.
#[pyfunction]
fn act(c: &str, observations: Vec<(String, String)>) -> PyResult<Option<String>> {
    let h = history(rat(c)?, observations)?;
    Ok(match policy::act(&h).map_err(to_py)? {
        PolicyAction::Stop => None,
        PolicyAction::Search(x) => Some(frac(&x)),
    })
}

/// The locations still consistent with a target, as closed intervals.
#[pyfunction]
fn search_window(observations: Vec<(String, String)>) -> PyResult<Vec<(String, String)>> {
    let h = history(from_int(1), observations)?;
    Ok(h.search_window()
        .map_err(to_py)?
        .intervals()
        .iter()
        .map(|(a, b)| (frac(a), frac(b)))
        .collect())
}

/// Plays the left-to-right policy against a known landscape.
#[pyfunction]
#[pyo3(signature = (c, index, max_steps=10_000))]
fn simulate<'py>(
    py: Python<'py>,
    c: &str,
    index: PyRef<'_, PyQualityIndex>,
    max_steps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let trace =
        lipsearch::sim::simulate(&LeftToRight, &index.inner, &rat(c)?, max_steps).map_err(to_py)?;
    trace_dict(py, &trace)
}

/// Plays a policy against the worst-case adversary; returns the trace and a
/// consistent witness landscape. `policy_json` is a scripted-policy JSON
/// document; None plays the builtin left-to-right policy.
#[pyfunction]
#[pyo3(signature = (c, policy_json=None, max_steps=10_000))]
fn adversary<'py>(
    py: Python<'py>,
    c: &str,
    policy_json: Option<&str>,
    max_steps: usize,
) -> PyResult<(Bound<'py, PyDict>, PyQualityIndex)> {
    let outcome = match policy_json {
        None => lipsearch::adversary::run_adversarial(&LeftToRight, &rat(c)?, max_steps),
        Some(text) => {
            let script = ScriptedPolicy::from_json_str(text).map_err(to_py)?;
            lipsearch::adversary::run_adversarial(&script, &rat(c)?, max_steps)
        }
    }
    .map_err(to_py)?;
    Ok((
        trace_dict(py, &outcome.trace)?,
        PyQualityIndex { inner: outcome.witness },
    ))
}

/// The flat-then-rise landscape that makes stopping at (x, z) exactly right.
#[pyfunction]
fn bifurcation_index(x: &str, z: &str) -> PyResult<PyQualityIndex> {
    Ok(PyQualityIndex {
        inner: lipsearch::adversary::bifurcation_index(&rat(x)?, &rat(z)?).map_err(to_py)?,
    })
}

/// Two-period risk class of a first observation: "bifurcation_risk",
/// "directional_risk" or "continue".
#[pyfunction]
fn classify(x: &str, z: &str, c: &str) -> PyResult<&'static str> {
    Ok(
        match two_period::classify(&rat(x)?, &rat(z)?, &rat(c)?).map_err(to_py)? {
            RiskClass::BifurcationRisk => "bifurcation_risk",
            RiskClass::DirectionalRisk => "directional_risk",
            RiskClass::Continue => "continue",
        },
    )
}

/// Lower boundary of the two-period stopping region at `x`.
#[pyfunction]
fn m_curve(x: &str, c: &str) -> PyResult<String> {
    Ok(frac(&two_period::m_curve(&rat(x)?, &rat(c)?).map_err(to_py)?))
}

#[pyfunction]
fn bifurcation_bound(x: &str) -> PyResult<String> {
    Ok(frac(&two_period::bifurcation_bound(&rat(x)?)))
}

#[pyfunction]
fn directional_bound(x: &str, c: &str) -> PyResult<String> {
    Ok(frac(&two_period::directional_bound(&rat(x)?, &rat(c)?).map_err(to_py)?))
}

fn instance(m: u32, kz: u32, c: &str, depth: u32, state_cap: Option<usize>) -> PyResult<DiscreteInstance> {
    let mut inst = DiscreteInstance::new(m, kz, rat(c)?, depth).map_err(to_py)?;
    if let Some(cap) = state_cap {
        inst = inst.with_state_cap(cap);
    }
    Ok(inst)
}

/// Exact minimax value of the discretized game, with every optimal first
/// search location.
#[pyfunction]
#[pyo3(signature = (m, kz, c, depth, state_cap=None))]
fn solve<'py>(
    py: Python<'py>,
    m: u32,
    kz: u32,
    c: &str,
    depth: u32,
    state_cap: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let solved = oracle::solve(&instance(m, kz, c, depth, state_cap)?).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("value", frac(&solved.value))?;
    out.set_item(
        "best_first_actions",
        solved.best_first_actions.iter().map(frac).collect::<Vec<_>>(),
    )?;
    Ok(out)
}

/// Worst-case value of the left-to-right policy on the discretized game.
#[pyfunction]
#[pyo3(signature = (m, kz, c, depth, state_cap=None))]
fn left_to_right_value(
    m: u32,
    kz: u32,
    c: &str,
    depth: u32,
    state_cap: Option<usize>,
) -> PyResult<String> {
    let value = oracle::value_of_policy(&instance(m, kz, c, depth, state_cap)?, &LeftToRight)
        .map_err(to_py)?;
    Ok(frac(&value))
}

/// Whether the policy stays optimal at every history it can reach in the
/// discretized game.
#[pyfunction]
#[pyo3(signature = (m, kz, c, depth, state_cap=None))]
fn dynamic_consistency_check(
    m: u32,
    kz: u32,
    c: &str,
    depth: u32,
    state_cap: Option<usize>,
) -> PyResult<bool> {
    oracle::dynamic_consistency_check(&instance(m, kz, c, depth, state_cap)?).map_err(to_py)
}

#[pymodule]
fn lipsearch_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQualityIndex>()?;
    m.add_function(wrap_pyfunction!(max_searches, m)?)?;
    m.add_function(wrap_pyfunction!(stop_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(root_guarantee, m)?)?;
    m.add_function(wrap_pyfunction!(ball_partition, m)?)?;
    m.add_function(wrap_pyfunction!(act, m)?)?;
    m.add_function(wrap_pyfunction!(search_window, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(adversary, m)?)?;
    m.add_function(wrap_pyfunction!(bifurcation_index, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(m_curve, m)?)?;
    m.add_function(wrap_pyfunction!(bifurcation_bound, m)?)?;
    m.add_function(wrap_pyfunction!(directional_bound, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(left_to_right_value, m)?)?;
    m.add_function(wrap_pyfunction!(dynamic_consistency_check, m)?)?;
    Ok(())
}

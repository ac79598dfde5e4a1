//! Python bindings for `rtmix_core`.
//!
//! Rational bounds cross the boundary as `"num/den"` strings, which
//! `fractions.Fraction` parses directly.

use pyo3::exceptions::{PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rtmix_core::blockip::{self, SimpleFourBlock};
use rtmix_core::gen::{self, JitterMode, JitterPreset};
use rtmix_core::mixing::{self, MixInstance, MixTerm};
use rtmix_core::reverse;
use rtmix_core::rta::{self, Algorithm, ResponseQuery};
use rtmix_core::sim::{self, JobRelease, ReleasePattern};
use rtmix_core::{arith, Error, TaskSystem};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::OverflowLimit(_) | Error::BudgetExceeded { .. } => PyOverflowError::new_err(e.to_string()),
        Error::InternalInvariantViolated(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Task", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PyTask {
    c: i64,
    p: i64,
    jitter: i64,
    d: Option<i64>,
}

#[pymethods]
impl PyTask {
    #[new]
    #[pyo3(signature = (c, p, jitter = 0, d = None))]
    fn new(c: i64, p: i64, jitter: i64, d: Option<i64>) -> Self {
        PyTask { c, p, jitter, d }
    }

    fn __repr__(&self) -> String {
        format!("Task(c={}, p={}, jitter={}, d={:?})", self.c, self.p, self.jitter, self.d)
    }

    fn __eq__(&self, other: &Self) -> bool {
        (self.c, self.p, self.jitter, self.d) == (other.c, other.p, other.jitter, other.d)
    }
}

impl From<&PyTask> for rtmix_core::Task {
    fn from(t: &PyTask) -> Self {
        rtmix_core::Task::new(t.c, t.d, t.p, t.jitter)
    }
}

impl From<&rtmix_core::Task> for PyTask {
    fn from(t: &rtmix_core::Task) -> Self {
        PyTask { c: t.c, p: t.p, jitter: t.jitter, d: t.d }
    }
}

fn system(tasks: &[PyTask]) -> TaskSystem {
    TaskSystem::new(tasks.iter().map(Into::into).collect())
}

fn from_system(ts: &TaskSystem) -> Vec<PyTask> {
    ts.tasks.iter().map(Into::into).collect()
}

fn algorithm(name: &str) -> PyResult<Algorithm> {
    let name = if name == "bruteforce" { "brute-force" } else { name };
    Algorithm::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown algorithm {name:?}")))
}

#[pyclass(name = "Bounds", get_all, frozen)]
struct PyBounds {
    ell: String,
    u1: String,
    u2: i64,
    u: i64,
}

#[pymethods]
impl PyBounds {
    fn __repr__(&self) -> String {
        format!("Bounds(ell={}, u1={}, u2={}, u={})", self.ell, self.u1, self.u2, self.u)
    }
}

#[pyclass(name = "MixInstance", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PyMixInstance {
    w0: i64,
    /// `(w, a, b)` per term.
    terms: Vec<(i64, i64, i64)>,
}

impl PyMixInstance {
    fn core(&self) -> MixInstance {
        MixInstance::new(self.w0, self.terms.iter().map(|&(w, a, b)| MixTerm { w, a, b }).collect())
    }

    fn wrap(inst: &MixInstance) -> Self {
        PyMixInstance { w0: inst.w0, terms: inst.terms.iter().map(|t| (t.w, t.a, t.b)).collect() }
    }
}

#[pymethods]
impl PyMixInstance {
    #[new]
    fn new(w0: i64, terms: Vec<(i64, i64, i64)>) -> Self {
        PyMixInstance { w0, terms }
    }

    fn objective_at(&self, s: i64) -> PyResult<i128> {
        let inst = self.core();
        inst.validate().map_err(to_py)?;
        Ok(inst.objective_at(s))
    }

    fn is_harmonic(&self) -> bool {
        self.core().is_harmonic()
    }

    fn is_unbounded(&self) -> bool {
        mixing::is_unbounded(&self.core())
    }

    fn __repr__(&self) -> String {
        format!("MixInstance(w0={}, terms={:?})", self.w0, self.terms)
    }
}

#[pyclass(name = "MixSolution", get_all, frozen)]
struct PyMixSolution {
    s: i64,
    x: Vec<i64>,
    objective: i64,
}

#[pymethods]
impl PyMixSolution {
    fn __repr__(&self) -> String {
        format!("MixSolution(s={}, x={:?}, objective={})", self.s, self.x, self.objective)
    }
}

/// Response time of a job with own cost `gamma` under the interfering `tasks`.
/// Returns `(response, algorithm used)`.
#[pyfunction]
#[pyo3(signature = (tasks, gamma, algorithm = "auto"))]
fn response_time(tasks: Vec<PyTask>, gamma: i64, algorithm: &str) -> PyResult<(i64, String)> {
    let q = ResponseQuery::new(tasks.iter().map(Into::into).collect(), gamma);
    let (r, used) = rta::response(&q, self::algorithm(algorithm)?).map_err(to_py)?;
    Ok((r, used.name().to_string()))
}

/// `(index, response, algorithm, schedulable)`.
type TaskRow = (usize, i64, String, Option<bool>);

/// One row per task, highest priority first.
#[pyfunction]
#[pyo3(signature = (tasks, algorithm = "auto"))]
fn analyze(tasks: Vec<PyTask>, algorithm: &str) -> PyResult<Vec<TaskRow>> {
    let report = rta::analyze_system(&system(&tasks), self::algorithm(algorithm)?).map_err(to_py)?;
    Ok(report.tasks.iter().map(|t| (t.index, t.response, t.algorithm.name().to_string(), t.schedulable)).collect())
}

#[pyfunction]
fn bounds(tasks: Vec<PyTask>, gamma: i64) -> PyResult<PyBounds> {
    let interfering: Vec<rtmix_core::Task> = tasks.iter().map(Into::into).collect();
    let b = rtmix_core::query_bounds(&interfering, gamma).map_err(to_py)?;
    Ok(PyBounds { ell: b.ell.to_string(), u1: b.u1.to_string(), u2: b.u2, u: b.u })
}

/// Algorithms: `auto`, `harmonic`, `breakpoints`, `bruteforce`, `shift`.
#[pyfunction]
#[pyo3(signature = (instance, algorithm = "auto"))]
fn solve_mix(instance: PyMixInstance, algorithm: &str) -> PyResult<PyMixSolution> {
    let inst = instance.core();
    let sol = match algorithm {
        "auto" => mixing::solve(&inst),
        "harmonic" => mixing::solve_harmonic(&inst),
        "breakpoints" => mixing::solve_breakpoints(&inst),
        "bruteforce" => mixing::solve_bruteforce(&inst),
        "shift" => reverse::solve_general_via_shift(&inst),
        other => return Err(PyValueError::new_err(format!("unknown algorithm {other:?}"))),
    }
    .map_err(to_py)?;
    Ok(PyMixSolution { s: sol.s, x: sol.x, objective: sol.objective })
}

#[pyfunction]
fn tight_mixing_instance(n: u32) -> PyResult<PyMixInstance> {
    Ok(PyMixInstance::wrap(&gen::tight_mixing_instance(n).map_err(to_py)?))
}

/// Jitters default to the periods.
#[pyfunction]
#[pyo3(signature = (c, p1, jitter = None))]
fn construct_extreme(c: Vec<i64>, p1: i64, jitter: Option<Vec<i64>>) -> PyResult<Vec<PyTask>> {
    let preset = jitter.map_or(JitterPreset::Period, JitterPreset::Explicit);
    Ok(from_system(&gen::construct_extreme(&c, p1, &preset).map_err(to_py)?))
}

#[pyfunction]
#[pyo3(signature = (seed, n, p_max, harmonic = false, jitter = "up-to-period"))]
fn random_system(seed: u64, n: usize, p_max: i64, harmonic: bool, jitter: &str) -> PyResult<Vec<PyTask>> {
    let mode = match jitter {
        "zero" => JitterMode::Zero,
        "up-to-period" => JitterMode::UpToPeriod,
        "full" => JitterMode::Full,
        other => return Err(PyValueError::new_err(format!("unknown jitter mode {other:?}"))),
    };
    Ok(from_system(&gen::random_system(seed, n, p_max, harmonic, mode).map_err(to_py)?))
}

/// Segments `(start, end, task or None)` and jobs
/// `(task, job, arrival, release, completion)` of the schedule.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn simulate(
    tasks: Vec<PyTask>,
    jobs: Vec<Vec<(i64, i64)>>,
    horizon: i64,
) -> PyResult<(Vec<(i64, i64, Option<usize>)>, Vec<(usize, usize, i64, i64, i64)>)> {
    let rp = ReleasePattern {
        jobs: jobs
            .into_iter()
            .map(|v| v.into_iter().map(|(arrival, release)| JobRelease { arrival, release }).collect())
            .collect(),
    };
    let trace = sim::simulate(&system(&tasks), &rp, horizon).map_err(to_py)?;
    Ok((
        trace.segments.iter().map(|s| (s.start, s.end, s.task)).collect(),
        trace.jobs.iter().map(|j| (j.task, j.job, j.arrival, j.release, j.completion)).collect(),
    ))
}

/// The 4-block encoding of a jitter-free system, as JSON.
#[pyfunction]
fn encode_rtc_as_4block(tasks: Vec<PyTask>) -> PyResult<String> {
    let p = blockip::encode_rtc_as_4block(&system(&tasks)).map_err(to_py)?;
    serde_json::to_string(&p).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Optimal objective of a simple 4-block program given as JSON.
#[pyfunction]
#[pyo3(signature = (program, h = None, budget = blockip::DEFAULT_BUDGET))]
fn solve_4block(program: &str, h: Option<i64>, budget: u64) -> PyResult<i64> {
    let p: SimpleFourBlock = serde_json::from_str(program).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let h = h.unwrap_or_else(|| p.default_h());
    blockip::solve_simple_4block(&p, h, budget).map_err(to_py)
}

/// Operations counted on this thread since the last `reset_ops`.
#[pyfunction]
fn ops() -> u64 {
    arith::ops()
}

#[pyfunction]
fn reset_ops() {
    arith::reset_ops()
}

#[pyfunction]
fn set_limit_bits(bits: u32) {
    arith::set_limit_bits(bits)
}

#[pymodule]
fn rtmix(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTask>()?;
    m.add_class::<PyBounds>()?;
    m.add_class::<PyMixInstance>()?;
    m.add_class::<PyMixSolution>()?;
    m.add_function(wrap_pyfunction!(response_time, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(solve_mix, m)?)?;
    m.add_function(wrap_pyfunction!(tight_mixing_instance, m)?)?;
    m.add_function(wrap_pyfunction!(construct_extreme, m)?)?;
    m.add_function(wrap_pyfunction!(random_system, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(encode_rtc_as_4block, m)?)?;
    m.add_function(wrap_pyfunction!(solve_4block, m)?)?;
    m.add_function(wrap_pyfunction!(ops, m)?)?;
    m.add_function(wrap_pyfunction!(reset_ops, m)?)?;
    m.add_function(wrap_pyfunction!(set_limit_bits, m)?)?;
    Ok(())
}

//! Python module `rpdhg_py`: instances, solves, condition reports and
//! preconditioning. Structured results come back as plain dicts.

use std::path::Path;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rpdhg::conditioning::{analyze as analyze_lp, AnalyzeOptions, NormVariant};
use rpdhg::linalg::SparseMatrixCSC;
use rpdhg::pdhg::pdhg_step as step;
use rpdhg::tuning;
use rpdhg::{Iterate, StandardFormLP, StepSizes};
use rpdhg_cli::commands::stats_json;
use rpdhg_cli::experiment::run_experiment as run_experiment_spec;
use rpdhg_cli::instance::{Family, LoadedInstance};
use rpdhg_cli::options::{PreconditionMode, StepSizeMode, TargetSpec};
use rpdhg_cli::pipeline::{precondition as precondition_lp, run_solve, SolveOptions};
use rpdhg_cli::{CliError, ExperimentSpec};

fn cli_err(e: CliError) -> PyErr {
    match e {
        CliError::Input(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn core_err(e: rpdhg::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Options for [`solve`], parsed from the strings the CLI accepts.
pub fn solve_options(
    target: &str,
    stepsize: &str,
    precondition: &str,
    max_steps: Option<usize>,
    probe_iters: Option<usize>,
) -> Result<SolveOptions, CliError> {
    let d = SolveOptions::default();
    Ok(SolveOptions {
        target: target.parse::<TargetSpec>()?,
        stepsize: stepsize.parse::<StepSizeMode>()?,
        precondition: precondition.parse::<PreconditionMode>()?,
        max_steps: max_steps.unwrap_or(d.max_steps),
        probe_iters: probe_iters.unwrap_or(d.probe_iters),
        ..d
    })
}

/// Standard-form instance `min cᵀx s.t. Ax = b, x ≥ 0`, optionally
/// remembering the MPS model it came from.
#[pyclass(frozen, skip_from_py_object, module = "rpdhg_py")]
#[derive(Clone)]
pub struct Instance {
    inner: LoadedInstance,
}

impl Instance {
    pub fn lp(&self) -> &StandardFormLP {
        &self.inner.lp
    }
}

#[pymethods]
impl Instance {
    /// Dense `a` given as a list of rows.
    #[staticmethod]
    #[pyo3(signature = (a, b, c, name = "lp"))]
    fn from_dense(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>, name: &str) -> PyResult<Self> {
        let a = SparseMatrixCSC::from_dense_rows(&a).map_err(core_err)?;
        let lp = StandardFormLP::new(name, a, b, c).map_err(core_err)?;
        Ok(Instance {
            inner: LoadedInstance { lp, original: None },
        })
    }

    #[staticmethod]
    fn from_mps(path: &str) -> PyResult<Self> {
        let inner = LoadedInstance::from_mps_file(Path::new(path)).map_err(cli_err)?;
        Ok(Instance { inner })
    }

    /// `lp_gamma` or `family1` .. `family4` at parameter `gamma`.
    #[staticmethod]
    fn family(name: &str, gamma: f64) -> PyResult<Self> {
        let f: Family = name.parse().map_err(cli_err)?;
        let inner = LoadedInstance::from_family(f, gamma).map_err(cli_err)?;
        Ok(Instance { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.lp().name().to_string()
    }

    #[getter]
    fn m(&self) -> usize {
        self.lp().m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.lp().n()
    }

    #[getter]
    fn b(&self) -> Vec<f64> {
        self.lp().b().to_vec()
    }

    #[getter]
    fn c(&self) -> Vec<f64> {
        self.lp().c().to_vec()
    }

    #[getter]
    fn has_known_optimum(&self) -> bool {
        self.lp().known_optimum().is_some()
    }

    /// `A` as a list of rows.
    fn a_dense(&self) -> Vec<Vec<f64>> {
        let a = self.lp().a();
        let mut rows = vec![vec![0.0; a.n_cols()]; a.n_rows()];
        for (i, j, v) in a.triplets() {
            rows[i][j] = v;
        }
        rows
    }

    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.lp().a().matvec(&x).map_err(core_err)
    }

    fn objective(&self, x: Vec<f64>) -> f64 {
        self.lp().objective(&x)
    }

    /// `(σ_max, σ_min⁺, κ)` of `A`.
    fn spectral(&self) -> PyResult<(f64, f64, f64)> {
        let s = self.lp().spectral().map_err(core_err)?;
        Ok((s.sigma_max, s.sigma_min_pos, s.kappa))
    }

    fn __repr__(&self) -> String {
        format!("Instance(name={:?}, m={}, n={})", self.lp().name(), self.lp().m(), self.lp().n())
    }
}

/// Restarted PDHG on `instance`; returns `{"solution": ..., "stats": ...}`.
#[pyfunction]
#[pyo3(signature = (instance, target = "er:1e-4", stepsize = "standard", precondition = "none", max_steps = None, probe_iters = None))]
fn solve(
    py: Python<'_>,
    instance: &Instance,
    target: &str,
    stepsize: &str,
    precondition: &str,
    max_steps: Option<usize>,
    probe_iters: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let opts = solve_options(target, stepsize, precondition, max_steps, probe_iters).map_err(cli_err)?;
    let lp = instance.lp();
    let out = py.detach(|| run_solve(lp, &opts)).map_err(cli_err)?;
    let mut solution = serde_json::json!({
        "instance": out.instance,
        "status": out.status(),
        "objective": out.objective,
        "x": out.x,
        "y": out.y,
        "s": out.solution.s,
    });
    if let Some((_, map)) = &instance.inner.original {
        solution["x_original"] = serde_json::json!(map.recover_x(&out.x));
        solution["objective_original"] = serde_json::json!(map.original_objective(out.objective));
    }
    let stats = stats_json(&out, &opts.target);
    to_py(py, &serde_json::json!({"solution": solution, "stats": stats}))
}

/// Condition measures and iteration bounds, as the `analyze` command reports them.
#[pyfunction]
#[pyo3(signature = (instance, eps = 1e-10, norm = "l1", oracle_samples = 0, seed = 0))]
fn analyze(
    py: Python<'_>,
    instance: &Instance,
    eps: f64,
    norm: &str,
    oracle_samples: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let variant = match norm {
        "l1" => NormVariant::L1,
        "linf" => NormVariant::ScaledLinf,
        other => return Err(PyValueError::new_err(format!("unknown norm `{other}` (expected l1 or linf)"))),
    };
    let opts = AnalyzeOptions {
        variant,
        eps,
        oracle_samples,
        seed,
        ..AnalyzeOptions::default()
    };
    let lp = instance.lp();
    let report = py.detach(|| analyze_lp(lp, &opts)).map_err(core_err)?;
    to_py(py, &report.to_json())
}

/// Preconditioned copy of `instance` with `mode` in `none`, `complete`, `diagonal`,
/// together with `κ` before and after.
#[pyfunction]
fn precondition(instance: &Instance, mode: &str) -> PyResult<(Instance, f64, f64)> {
    let mode: PreconditionMode = mode.parse().map_err(cli_err)?;
    let p = precondition_lp(instance.lp(), mode).map_err(cli_err)?;
    let inst = Instance {
        inner: LoadedInstance { lp: p.lp, original: None },
    };
    Ok((inst, p.kappa_before, p.kappa_after))
}

/// `(τ, σ)` of the default rule.
#[pyfunction]
fn standard_stepsizes(instance: &Instance) -> PyResult<(f64, f64)> {
    let s = tuning::standard_stepsizes(instance.lp()).map_err(core_err)?;
    Ok((s.tau, s.sigma))
}

/// `(τ, σ)` balanced by the primal and dual sharpness.
#[pyfunction]
fn sharpness_stepsizes(instance: &Instance, mu_p: f64, mu_d: f64) -> PyResult<(f64, f64)> {
    let s = tuning::sharpness_stepsizes(instance.lp(), mu_p, mu_d).map_err(core_err)?;
    Ok((s.tau, s.sigma))
}

/// One PDHG step from `(x, y)`.
#[pyfunction]
fn pdhg_step(instance: &Instance, x: Vec<f64>, y: Vec<f64>, tau: f64, sigma: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let lp = instance.lp();
    if x.len() != lp.n() || y.len() != lp.m() {
        return Err(PyValueError::new_err(format!(
            "iterate has lengths ({}, {}), instance is {}x{}",
            x.len(),
            y.len(),
            lp.m(),
            lp.n()
        )));
    }
    let steps = StepSizes::for_lp(tau, sigma, lp).map_err(core_err)?;
    let z = step(&Iterate::new(x, y), lp, &steps);
    Ok((z.x, z.y))
}

/// Runs an experiment from the same JSON spec the CLI reads, given as a dict.
#[pyfunction]
fn run_experiment(py: Python<'_>, spec: &Bound<'_, PyDict>) -> PyResult<Py<PyAny>> {
    let text: String = py.import("json")?.call_method1("dumps", (spec,))?.extract()?;
    let spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = py.detach(|| run_experiment_spec(&spec)).map_err(cli_err)?;
    let v = serde_json::json!({"rows": out.rows, "summary": out.summary});
    to_py(py, &v)
}

/// Adds every class and function to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(precondition, m)?)?;
    m.add_function(wrap_pyfunction!(standard_stepsizes, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness_stepsizes, m)?)?;
    m.add_function(wrap_pyfunction!(pdhg_step, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}

#[pymodule]
fn rpdhg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn options_parse_like_the_cli() {
        let o = solve_options("ed:1e-8", "sharpness:0.5,0.25", "complete", Some(10), None).unwrap();
        assert_eq!(o.target.tolerance(), Some(1e-8));
        assert!(o.target.is_distance());
        assert_eq!(o.stepsize, StepSizeMode::Sharpness { mu_p: 0.5, mu_d: 0.25 });
        assert_eq!(o.precondition, PreconditionMode::Complete);
        assert_eq!(o.max_steps, 10);
        assert_eq!(o.probe_iters, SolveOptions::default().probe_iters);
    }

    #[test]
    fn bad_options_are_input_errors() {
        assert!(matches!(solve_options("xx:1", "standard", "none", None, None), Err(CliError::Input(_))));
        assert!(matches!(solve_options("er:1e-4", "fast", "none", None, None), Err(CliError::Input(_))));
        assert!(matches!(solve_options("er:1e-4", "standard", "full", None, None), Err(CliError::Input(_))));
    }
}

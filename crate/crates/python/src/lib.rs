//! Python bindings. Structured results are returned as plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use quadsurf::certificates;
use quadsurf::config::RunConfig;
use quadsurf::oracle;
use quadsurf::shapeopt::{initial_level_set, Descent, Problem};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Balancing radius for `f = c χ(B_a)` and `g = k |x|^alpha`.
#[pyfunction]
#[pyo3(signature = (c, a, k, alpha = 0.0))]
fn radial_qs_radius(c: f64, a: f64, k: f64, alpha: f64) -> PyResult<f64> {
    oracle::radial_qs_radius_power(c, a, k, alpha).map_err(err)
}

/// `u(0)`, `u'(R)` and `∫u` of the radial Poisson solution on `B_R`.
#[pyfunction]
#[pyo3(name = "radial_poisson")]
fn radial_poisson_py<'py>(py: Python<'py>, c: f64, a: f64, big_r: f64) -> PyResult<Bound<'py, PyAny>> {
    let p = oracle::radial_poisson(c, a, big_r).map_err(err)?;
    to_py(py, &serde_json::json!({"R": big_r, "u0": p.u0(), "du_R": p.du_r(), "integral": p.integral()}))
}

/// Product datum `|u'(R) v'(R)|` of the radial cascade.
#[pyfunction]
fn radial_bilap_g(c: f64, a: f64, big_r: f64) -> PyResult<f64> {
    oracle::radial_bilap_g(c, a, big_r).map_err(err)
}

/// Chain of means of positive samples.
#[pyfunction]
fn means_chain<'py>(py: Python<'py>, values: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &certificates::means_chain(&values).map_err(err)?)
}

/// Evaluate every certificate for a JSON run configuration.
#[pyfunction]
fn check<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RunConfig::from_json(config).map_err(err)?;
    let reports = py
        .detach(|| {
            certificates::evaluate_all(&cfg.source()?, &cfg.g_spec()?, cfg.grid()?, &cfg.certificates)
        })
        .map_err(err)?;
    to_py(py, &reports)
}

/// Run shape descent for a JSON run configuration and return the report.
#[pyfunction]
#[pyo3(signature = (config, problem = "qs", g_squared = false))]
fn solve<'py>(py: Python<'py>, config: &str, problem: &str, g_squared: bool) -> PyResult<Bound<'py, PyAny>> {
    let cfg = RunConfig::from_json(config).map_err(err)?;
    let problem = match problem {
        "qs" => Problem::Qs,
        "bilap" => Problem::Bilap { g_squared: g_squared || cfg.g_squared },
        other => return Err(err(format!("unknown problem {other:?}, expected \"qs\" or \"bilap\""))),
    };
    let report = py
        .detach(|| {
            let (f, g, grid) = (cfg.source()?, cfg.g_spec()?, cfg.grid()?);
            let descent = Descent::new(problem, &f, &g, cfg.descent, grid)?;
            descent.run(&initial_level_set(&f, &cfg.init(), grid)?, |_, _, _| {})
        })
        .map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn quadsurf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(radial_qs_radius, m)?)?;
    m.add_function(wrap_pyfunction!(radial_poisson_py, m)?)?;
    m.add_function(wrap_pyfunction!(radial_bilap_g, m)?)?;
    m.add_function(wrap_pyfunction!(means_chain, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}

//! Python bindings: special functions, family matrices, linear solves,
//! classification and scenario runs. Structured results cross the boundary
//! as JSON strings.

use fracrelax::ap::{classify as classify_signal, ApConfig};
use fracrelax::families::{Family, FamilyEvaluator};
use fracrelax::harness::{self, Scenario, BUNDLED};
use fracrelax::mild::{self, Grid};
use fracrelax::oplib::Operator;
use fracrelax::signal::{Forcing, Signal};
use fracrelax::specfun::{self, SpecialFnConfig};
use fracrelax::Error;
use nalgebra::DVector;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn family(name: &str) -> PyResult<Family> {
    match name {
        "S" => Ok(Family::S),
        "P" => Ok(Family::P),
        "R" => Ok(Family::R),
        other => Err(PyValueError::new_err(format!("family must be S, P or R, got {other}"))),
    }
}

/// E_{g,b}(x) for real x.
#[pyfunction]
#[pyo3(signature = (g, b, x))]
fn mittag_leffler(g: f64, b: f64, x: f64) -> PyResult<f64> {
    specfun::mittag_leffler_real(g, b, x, &SpecialFnConfig::default()).map_err(py_err)
}

/// M-Wright function Φ_g(t).
#[pyfunction]
fn wright(g: f64, t: f64) -> PyResult<f64> {
    specfun::wright(g, t, &SpecialFnConfig::default()).map_err(py_err)
}

/// Matrix of S_γ(t), P_γ(t) or R_γ(t) for an operator given as JSON.
#[pyfunction]
fn family_matrix(operator_json: &str, gamma: f64, name: &str, t: f64) -> PyResult<Vec<Vec<f64>>> {
    let ev = FamilyEvaluator::new(Operator::from_json(operator_json).map_err(py_err)?, gamma).map_err(py_err)?;
    let m = ev.family_matrix(family(name)?, t).map_err(py_err)?;
    Ok((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
}

/// Linear mild solution on `[0, t_end]` with `n` steps; returns (times, states).
#[pyfunction]
#[pyo3(signature = (operator_json, gamma, x0, forcing_json, t_end, n))]
fn solve_linear(
    operator_json: &str,
    gamma: f64,
    x0: Vec<f64>,
    forcing_json: &str,
    t_end: f64,
    n: usize,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let ev = FamilyEvaluator::new(Operator::from_json(operator_json).map_err(py_err)?, gamma).map_err(py_err)?;
    let f: Forcing = serde_json::from_str(forcing_json).map_err(json_err)?;
    let grid = Grid::new(t_end, n).map_err(py_err)?;
    let traj = mild::solve_linear(&ev, &DVector::from_vec(x0), &f, &grid).map_err(py_err)?;
    Ok((traj.times(), traj.states.iter().map(|s| s.iter().copied().collect()).collect()))
}

/// Classifies uniformly sampled rows; returns the APReport as JSON.
#[pyfunction]
#[pyo3(signature = (values, t0, dt, config_json=None))]
fn classify(values: Vec<Vec<f64>>, t0: f64, dt: f64, config_json: Option<&str>) -> PyResult<String> {
    let dim = values.first().map_or(0, |r| r.len());
    if dim == 0 || values.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("values must be a non-empty list of equal-length rows"));
    }
    let cfg: ApConfig = match config_json {
        Some(s) => serde_json::from_str(s).map_err(json_err)?,
        None => ApConfig::default(),
    };
    let sig = Signal::new(t0, dt, dim, values.concat()).map_err(py_err)?;
    let rep = classify_signal(&sig, &cfg).map_err(py_err)?;
    serde_json::to_string(&rep).map_err(json_err)
}

/// Runs a scenario given as JSON text or a bundled name; returns the
/// RunReport as JSON. With `out_dir`, artifacts are written there too.
#[pyfunction]
#[pyo3(signature = (config, overrides=Vec::new(), out_dir=None))]
fn run_scenario(config: &str, overrides: Vec<String>, out_dir: Option<&str>) -> PyResult<String> {
    let sc = if BUNDLED.iter().any(|b| b.name == config) {
        harness::bundled(config, &overrides)
    } else {
        Scenario::from_json(config, &overrides)
    }
    .map_err(py_err)?;
    let mut art = harness::run(&sc).map_err(py_err)?;
    if let Some(dir) = out_dir {
        harness::emit_outputs(&mut art, std::path::Path::new(dir)).map_err(py_err)?;
    }
    serde_json::to_string(&art.report).map_err(json_err)
}

#[pyfunction]
fn list_scenarios() -> Vec<&'static str> {
    BUNDLED.iter().map(|b| b.name).collect()
}

#[pymodule]
#[pyo3(name = "fracrelax")]
fn fracrelax_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(wright, m)?)?;
    m.add_function(wrap_pyfunction!(family_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(solve_linear, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(list_scenarios, m)?)?;
    Ok(())
}

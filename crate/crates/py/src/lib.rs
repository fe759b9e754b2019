//! Python bindings: capacities, densities and ladder runs.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use perfhom::config::{parse_str, ExperimentId, RunConfig};
use perfhom::experiments::{build_experiment, run_capacity, run_ladder};
use perfhom::materials::EnergyModel;
use perfhom::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::InvalidArgument(_) => PyValueError::new_err(err.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn config(text: Option<&str>, overrides: Vec<String>) -> PyResult<RunConfig> {
    parse_str(text.unwrap_or(""), &overrides).map_err(to_py)
}

/// Closed-form capacity of a disk of diameter 1 in the plane.
#[pyfunction]
fn ball_capacity_formula(p: f64) -> PyResult<f64> {
    if !(p > 1.0 && p < 2.0) {
        return Err(PyValueError::new_err(format!("p must lie in (1, 2), got {p}")));
    }
    Ok(perfhom::capacity::ball_capacity_formula(p))
}

/// Extrapolated cell capacity; returns `(value, ladder_csv)`.
#[pyfunction]
#[pyo3(signature = (shape = "boundary_segment", p = 1.5, angular = 64))]
fn capacity(py: Python<'_>, shape: &str, p: f64, angular: usize) -> PyResult<(f64, String)> {
    let cfg = config(
        None,
        vec![
            format!("shape={shape}"),
            format!("cell_p={p}"),
            format!("angular={angular}"),
        ],
    )?;
    let run = py.detach(|| run_capacity(&cfg)).map_err(to_py)?;
    Ok((run.value(), run.to_csv()))
}

/// Stored energy of a 2 x 2 gradient `xi` (displacement gradient for
/// `p_norm`, deformation gradient for `neo_hookean`).
#[pyfunction]
#[pyo3(signature = (xi, model = "p_norm", p = 1.5, mu = 1.0, lam = 1.0))]
fn energy_density(xi: [[f64; 2]; 2], model: &str, p: f64, mu: f64, lam: f64) -> PyResult<f64> {
    let m = match model {
        "p_norm" => EnergyModel::p_norm(p),
        "neo_hookean" => EnergyModel::neo_hookean(mu, lam),
        other => return Err(PyValueError::new_err(format!("unknown model `{other}`"))),
    }
    .map_err(to_py)?;
    m.density(&[xi[0], xi[1], [0.0; 2]]).map_err(to_py)
}

/// Fully resolved configuration text of an experiment's defaults.
#[pyfunction]
#[pyo3(signature = (experiment = "bvp1"))]
fn default_config(experiment: &str) -> PyResult<String> {
    let id = ExperimentId::from_name(experiment)
        .ok_or_else(|| PyValueError::new_err(format!("unknown experiment `{experiment}`")))?;
    Ok(RunConfig::defaults(id).to_ini())
}

/// Runs a ladder from configuration text and overrides. Returns a dict with
/// the report CSV, per-row dicts and the monotonicity flags.
#[pyfunction]
#[pyo3(signature = (config_text = None, overrides = Vec::new()))]
fn ladder<'py>(py: Python<'py>, config_text: Option<&str>, overrides: Vec<String>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(config_text, overrides)?;
    let report = py
        .detach(|| build_experiment(&cfg).map(|exp| run_ladder(&exp)))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("csv", report.to_csv())?;
    out.set_item("capacity", report.capacity)?;
    out.set_item("gaps_decrease", report.gaps_decrease())?;
    out.set_item("errors_decrease", report.errors_decrease())?;
    out.set_item("partial", report.partial())?;
    let mut rows = Vec::new();
    for r in report.rows.iter().chain(std::iter::once(&report.limit)) {
        let d = PyDict::new(py);
        d.set_item("eps", r.epsilon)?;
        d.set_item("delta", r.delta)?;
        d.set_item("energy", r.energy)?;
        d.set_item("energy_limit_gap", r.energy_limit_gap)?;
        d.set_item("l2_error", r.l2_error)?;
        d.set_item("iters", r.iterations)?;
        d.set_item("ok", r.is_ok())?;
        d.set_item("min_jacobian", r.min_jacobian)?;
        rows.push(d);
    }
    out.set_item("rows", rows)?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "perfhom")]
fn perfhom_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ball_capacity_formula, m)?)?;
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(energy_density, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(ladder, m)?)?;
    Ok(())
}

//! Python bindings. Profiles come back as `(x, rho)` lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use taseplk::continuum::{steady_solve, SteadyConfig};
use taseplk::lattice::{kmc_run_detailed, meanfield_steady, KmcConfig};
use taseplk::{DensityProfile, Error, ModelParams, Tolerance};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parameter(_) | Error::Structure(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn params(alpha: f64, beta: f64, omega_a: f64, omega_d: f64, epsilon: f64) -> PyResult<ModelParams> {
    ModelParams::new(alpha, beta, omega_a, omega_d, epsilon).map_err(py_err)
}

fn columns(p: &DensityProfile) -> (Vec<f64>, Vec<f64>) {
    (p.grid().to_vec(), p.values().to_vec())
}

/// Phase label and features as a dict.
#[pyfunction]
fn classify<'py>(py: Python<'py>, alpha: f64, beta: f64, omega_a: f64, omega_d: f64) -> PyResult<Bound<'py, PyDict>> {
    let p = params(alpha, beta, omega_a, omega_d, 0.01)?;
    let (label, f) = taseplk::classify(&p).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("regime", label.name().split('-').next().unwrap_or_default())?;
    d.set_item("phase", label.index)?;
    d.set_item("name", label.name())?;
    d.set_item("applied_symmetry", label.applied_symmetry)?;
    d.set_item("boundary_flag", label.boundary_flag)?;
    d.set_item("x_d", f.x_d)?;
    d.set_item("x_p", f.x_p)?;
    d.set_item("x_q", f.x_q)?;
    d.set_item("r_bar", f.r_bar)?;
    Ok(d)
}

/// ε → 0 limit profile sampled on `n_cells + 1` nodes.
#[pyfunction]
#[pyo3(signature = (alpha, beta, omega_a, omega_d, n_cells = 1000))]
fn limit_profile(alpha: f64, beta: f64, omega_a: f64, omega_d: f64, n_cells: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = params(alpha, beta, omega_a, omega_d, 0.01)?;
    let lim = taseplk::limit_profile(&p).map_err(py_err)?;
    let prof = DensityProfile::from_values(lim.sample(n_cells)).map_err(py_err)?;
    Ok(columns(&prof))
}

#[pyfunction]
#[pyo3(signature = (alpha, beta, omega_a, omega_d, epsilon, n_cells = None))]
fn steady(alpha: f64, beta: f64, omega_a: f64, omega_d: f64, epsilon: f64, n_cells: Option<usize>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = params(alpha, beta, omega_a, omega_d, epsilon)?;
    let cfg = SteadyConfig { n_cells, ..SteadyConfig::default() };
    let rho = steady_solve(&p, &cfg).map_err(py_err)?;
    Ok(columns(&rho))
}

#[pyfunction]
fn meanfield(alpha: f64, beta: f64, omega_a: f64, omega_d: f64, epsilon: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = params(alpha, beta, omega_a, omega_d, epsilon)?;
    let rho = meanfield_steady(&p, &Tolerance::default()).map_err(py_err)?;
    Ok(columns(&rho))
}

/// Returns `(x, mean, stderr)`.
#[pyfunction]
#[pyo3(signature = (alpha, beta, omega_a, omega_d, epsilon, seed = 0, t_burn = 1000.0, t_sample = 1000.0, replicas = 4))]
#[allow(clippy::too_many_arguments)]
fn kmc(
    alpha: f64,
    beta: f64,
    omega_a: f64,
    omega_d: f64,
    epsilon: f64,
    seed: u64,
    t_burn: f64,
    t_sample: f64,
    replicas: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let p = params(alpha, beta, omega_a, omega_d, epsilon)?;
    let out = kmc_run_detailed(&p, &KmcConfig::new(seed, t_burn, t_sample, replicas)).map_err(py_err)?;
    let (x, m) = columns(&out.mean);
    Ok((x, m, out.stderr))
}

#[pymodule]
fn taseplk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", taseplk::VERSION)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(limit_profile, m)?)?;
    m.add_function(wrap_pyfunction!(steady, m)?)?;
    m.add_function(wrap_pyfunction!(meanfield, m)?)?;
    m.add_function(wrap_pyfunction!(kmc, m)?)?;
    Ok(())
}

//! Python module `qotransport`.
//!
//! Configurations are passed as a list of `(q, p)` points and a list of
//! weights. Invalid input raises `ValueError`; solver failures raise
//! `RuntimeError`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qot_core::gaussian::{CoherentPoint, PhaseSpaceContext, WeightedConfiguration};
use qot_core::quantum::{mk2_squared_with, Mk2Options};
use qot_core::semiclassical::{check_husimi_bound, gap_row, HusimiGridSpec};
use qot_core::Error;

type Points = Vec<(f64, f64)>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::MaxIterations { .. }
        | Error::NumericalBreakdown(_)
        | Error::GridTooCoarse { .. }
        | Error::InconsistentConstraints(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn configuration(points: &Points, weights: &[f64]) -> PyResult<WeightedConfiguration> {
    let points = points
        .iter()
        .map(|&(q, p)| CoherentPoint::new(q, p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    WeightedConfiguration::new(points, weights.to_vec()).map_err(to_py)
}

/// Optimal quantum coupling with its dual certificate.
#[pyclass(frozen, get_all, module = "qotransport")]
pub struct Mk2Result {
    value: f64,
    lower_bound: f64,
    certified_gap: f64,
    iterations: usize,
    /// Coupling in the orthonormal product basis, row-major.
    coupling: Vec<Vec<Complex64>>,
    witness_valid: bool,
}

#[pymethods]
impl Mk2Result {
    fn __repr__(&self) -> String {
        format!(
            "Mk2Result(value={}, certified_gap={:e}, iterations={})",
            self.value, self.certified_gap, self.iterations
        )
    }
}

/// Classical `W₂²` between the two point measures.
#[pyfunction]
fn w2_squared(
    x_points: Points,
    x_weights: Vec<f64>,
    y_points: Points,
    y_weights: Vec<f64>,
) -> PyResult<f64> {
    let x = configuration(&x_points, &x_weights)?;
    let y = configuration(&y_points, &y_weights)?;
    Ok(qot_core::transport::w2_squared(&x, &y).map_err(to_py)?.cost)
}

/// Quantum `MK₂²` between the coherent-state mixtures.
#[pyfunction]
#[pyo3(signature = (hbar, x_points, x_weights, y_points, y_weights, tolerance = 1e-9, max_iterations = 200_000))]
#[allow(clippy::too_many_arguments)]
fn mk2_squared(
    py: Python<'_>,
    hbar: f64,
    x_points: Points,
    x_weights: Vec<f64>,
    y_points: Points,
    y_weights: Vec<f64>,
    tolerance: f64,
    max_iterations: usize,
) -> PyResult<Mk2Result> {
    let ctx = PhaseSpaceContext::new(hbar).map_err(to_py)?;
    let x = configuration(&x_points, &x_weights)?;
    let y = configuration(&y_points, &y_weights)?;
    let mut opts = Mk2Options::default();
    opts.sdp.tolerance = tolerance;
    opts.sdp.max_iterations = max_iterations;
    let sol = py
        .detach(|| mk2_squared_with(&ctx, &x, &y, &opts))
        .map_err(to_py)?;
    let m = sol.coupling.matrix();
    Ok(Mk2Result {
        value: sol.value,
        lower_bound: sol.lower_bound(),
        certified_gap: sol.certified_gap(),
        iterations: sol.report.iterations,
        coupling: (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect(),
        witness_valid: sol.witness.is_valid(),
    })
}

/// Unequal-mass scenario at one `ℏ`: `(c_classical, c_quantum, gap, eps,
/// perturbed_value, dual_gap)`.
#[pyfunction]
#[pyo3(signature = (a, eta, hbar, eps = None))]
fn unequal_mass(
    a: f64,
    eta: f64,
    hbar: f64,
    eps: Option<f64>,
) -> PyResult<(f64, f64, f64, f64, f64, f64)> {
    let r = gap_row(a, eta, hbar, eps).map_err(to_py)?;
    Ok((
        r.c_classical,
        r.c_quantum,
        r.gap,
        r.eps,
        r.perturbed_value,
        r.dual_gap,
    ))
}

/// Husimi `W₂²` against `MK₂² + 4ℏ`: `(w2_husimi, bound, tolerance, holds)`.
#[pyfunction]
#[pyo3(signature = (hbar, x_points, x_weights, y_points, y_weights, step = 0.1, half_width = 8.0))]
#[allow(clippy::too_many_arguments)]
fn husimi_bound(
    py: Python<'_>,
    hbar: f64,
    x_points: Points,
    x_weights: Vec<f64>,
    y_points: Points,
    y_weights: Vec<f64>,
    step: f64,
    half_width: f64,
) -> PyResult<(f64, f64, f64, bool)> {
    let ctx = PhaseSpaceContext::new(hbar).map_err(to_py)?;
    let x = configuration(&x_points, &x_weights)?;
    let y = configuration(&y_points, &y_weights)?;
    let spec = HusimiGridSpec {
        step,
        half_width,
        ..HusimiGridSpec::default()
    };
    let r = py
        .detach(|| check_husimi_bound(&ctx, &x, &y, &spec))
        .map_err(to_py)?;
    Ok((r.w2_husimi, r.bound, r.tolerance, r.holds()))
}

/// Self-check suite as `(name, passed, detail)` triples.
#[pyfunction]
fn verify(py: Python<'_>) -> Vec<(String, bool, String)> {
    py.detach(qot_core::verify::run_all)
        .into_iter()
        .map(|c| (c.name, c.passed, c.detail))
        .collect()
}

#[pymodule]
pub mod qotransport {
    #[pymodule_export]
    use super::{husimi_bound, mk2_squared, unequal_mass, verify, w2_squared, Mk2Result};
}

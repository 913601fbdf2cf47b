//! Python bindings: the family evaluators, the profile integrator, the
//! grid builder and the residual suite, exposed with plain Python types
//! (complex numbers map to Python complex).

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pmclab::report::{grid_to_csv, report_to_json};
use pmclab::verify::{RunSpec, VerifySettings};
use pmclab::{formulas, params, profile, verify};

fn err(e: pmclab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "ModelParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: params::ModelParams,
}

#[pymethods]
impl PyModelParams {
    /// Family parameters: rho = -3 b^2, branch inferred from c3.
    #[new]
    #[pyo3(signature = (b, c3, im_sign = "plus", alpha_side = "acute", rho_scale = 1.0))]
    fn new(b: f64, c3: f64, im_sign: &str, alpha_side: &str, rho_scale: f64) -> PyResult<Self> {
        let mut p = params::ModelParams::family(b, c3)
            .map_err(err)?
            .with_im_sign(im_sign.parse().map_err(err)?)
            .with_alpha_side(alpha_side.parse().map_err(err)?);
        if rho_scale != 1.0 {
            p = p.with_rho_scale(rho_scale);
        }
        Ok(PyModelParams { inner: p })
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn c3(&self) -> f64 {
        self.inner.c3
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    #[getter]
    fn branch(&self) -> &'static str {
        self.inner.branch.as_str()
    }

    /// (lo, hi, hi_closed) of the admissible sin^2(alpha) interval.
    fn interval(&self) -> (f64, f64, bool) {
        let iv = self.inner.interval();
        (iv.lo, iv.hi, iv.hi_closed)
    }

    /// Angle whose sin^2 is the interval midpoint, on the configured side.
    fn default_alpha0(&self) -> f64 {
        self.inner.default_alpha0()
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(b={}, c3={}, rho={}, branch={})",
            self.inner.b,
            self.inner.c3,
            self.inner.rho,
            self.inner.branch.as_str()
        )
    }
}

#[pyclass(name = "AlphaProfile", frozen)]
struct PyAlphaProfile {
    inner: profile::AlphaProfile,
}

#[pymethods]
impl PyAlphaProfile {
    #[getter]
    fn u_nodes(&self) -> Vec<f64> {
        self.inner.u_nodes.clone()
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha.clone()
    }

    #[getter]
    fn g(&self) -> Vec<f64> {
        self.inner.g.clone()
    }

    #[getter]
    fn mu(&self) -> Vec<Complex64> {
        self.inner.mu.clone()
    }

    #[getter]
    fn stop_reason(&self) -> &'static str {
        self.inner.stop_reason.as_str()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "AlphaProfile(n={}, stop_reason={})",
            self.inner.len(),
            self.inner.stop_reason.as_str()
        )
    }
}

#[pyclass(name = "SurfaceGrid", frozen)]
struct PySurfaceGrid {
    inner: pmclab::SurfaceGrid,
}

#[pymethods]
impl PySurfaceGrid {
    #[getter]
    fn n_u(&self) -> usize {
        self.inner.n_u()
    }

    #[getter]
    fn n_v(&self) -> usize {
        self.inner.n_v()
    }

    /// Number of (u, v) cells where |c|^2 < 0.
    #[getter]
    fn n_invalid(&self) -> usize {
        self.inner.invalid_cells.len()
    }

    fn to_csv(&self) -> String {
        grid_to_csv(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("SurfaceGrid(n_u={}, n_v={})", self.inner.n_u(), self.inner.n_v())
    }
}

#[pyclass(name = "ResidualReport", frozen)]
struct PyResidualReport {
    inner: verify::ResidualReport,
}

#[pymethods]
impl PyResidualReport {
    #[getter]
    fn verdict(&self) -> bool {
        self.inner.verdict
    }

    /// Mapping name -> {max_abs, tolerance, pass}.
    fn entries<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = PyDict::new(py);
        for e in &self.inner.entries {
            let d = PyDict::new(py);
            d.set_item("max_abs", e.max_abs)?;
            d.set_item("tolerance", e.tolerance)?;
            d.set_item("pass", e.pass)?;
            out.set_item(e.name, d)?;
        }
        Ok(out)
    }

    fn to_json(&self) -> String {
        report_to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "ResidualReport(verdict={})",
            if self.inner.verdict { "pass" } else { "fail" }
        )
    }
}

/// Admissible sin^2(alpha) intervals for a shape constant, as
/// (lo, hi, hi_closed) tuples.
#[pyfunction]
fn admissible_intervals(c3: f64) -> PyResult<Vec<(f64, f64, bool)>> {
    Ok(params::admissible_intervals(c3)
        .map_err(err)?
        .into_iter()
        .map(|iv| (iv.lo, iv.hi, iv.hi_closed))
        .collect())
}

/// y^2 = 8 c3 / ((8 - 9 s)(s - c3)) for s strictly inside the interval.
#[pyfunction]
fn y_squared(s: f64, c3: f64) -> PyResult<f64> {
    formulas::y_squared(s, c3).map_err(err)
}

/// The closed-form second-fundamental-form coefficient a(alpha).
#[pyfunction]
fn a_of_alpha(alpha: f64, params: &PyModelParams) -> PyResult<Complex64> {
    formulas::a_of_alpha(alpha, &params.inner).map_err(err)
}

/// tau = (a - b)/(a + b).
#[pyfunction]
fn tau_of_a(a: Complex64, b: f64) -> PyResult<Complex64> {
    formulas::tau_of_a(a, b).map_err(err)
}

/// |c| from the normal-curvature relation; errors when |c|^2 < 0.
#[pyfunction]
fn c_modulus(alpha: f64, a: Complex64, rho: f64) -> PyResult<f64> {
    formulas::c_modulus(alpha, a, rho).map_err(err)
}

/// Gaussian curvature from a: -4(|a|^2 - b^2) + 6 rho cos^2(alpha).
#[pyfunction]
fn gauss_curvature_from_a(alpha: f64, a: Complex64, b: f64, rho: f64) -> f64 {
    formulas::gauss_curvature_from_a(alpha, a, b, rho)
}

/// Closed-form family curvature -2 b^2 ((9 s - 8)^2 + (8 - 9 c3))/(8 - 9 c3).
#[pyfunction]
fn gauss_curvature_closed(alpha: f64, b: f64, c3: f64) -> PyResult<f64> {
    formulas::gauss_curvature_closed(alpha, b, c3).map_err(err)
}

/// The polynomial whose vanishing characterizes the zero phase constant.
#[pyfunction]
fn identity_31_residual(alpha: f64, a: Complex64, b: f64) -> f64 {
    formulas::identity_31_residual(alpha, a, b)
}

/// Integrate the angle profile over [-u_span, u_span] from alpha0.
#[pyfunction]
#[pyo3(signature = (params, alpha0, u_span, h, delta = 1e-6))]
fn integrate_profile(
    params: &PyModelParams,
    alpha0: f64,
    u_span: f64,
    h: f64,
    delta: f64,
) -> PyResult<PyAlphaProfile> {
    let opts = profile::IntegrateOptions::new(u_span, h).with_delta(delta);
    let inner = profile::integrate_profile_with(&params.inner, alpha0, opts).map_err(err)?;
    Ok(PyAlphaProfile { inner })
}

/// Sample every pointwise quantity over the profile times a centered
/// v-lattice.
#[pyfunction]
#[pyo3(signature = (profile, v_count = 5, v_step = None))]
fn build_grid(
    profile: &PyAlphaProfile,
    v_count: usize,
    v_step: Option<f64>,
) -> PyResult<PySurfaceGrid> {
    let step = v_step.unwrap_or(profile.inner.h);
    let inner = pmclab::build_grid(&profile.inner, pmclab::centered_v_nodes(v_count, step))
        .map_err(err)?;
    Ok(PySurfaceGrid { inner })
}

/// Run the sixteen-entry residual suite on a grid.
#[pyfunction]
#[pyo3(signature = (grid, margin_frac = 0.15))]
fn run_residual_suite(grid: &PySurfaceGrid, margin_frac: f64) -> PyResult<PyResidualReport> {
    let settings = VerifySettings {
        margin_frac,
        ..VerifySettings::default()
    };
    let inner = verify::run_residual_suite(&grid.inner, grid.inner.profile.h, &settings)
        .map_err(err)?;
    Ok(PyResidualReport { inner })
}

/// Rebuild with rho = -3 b^2 * rho_scale (keeping a(alpha)) and rerun the
/// suite; the structural residuals must fail for rho_scale != 1.
#[pyfunction]
#[pyo3(signature = (params, rho_scale, alpha0 = None, u_span = 0.5, h = 1e-3))]
fn negative_control(
    params: &PyModelParams,
    rho_scale: f64,
    alpha0: Option<f64>,
    u_span: f64,
    h: f64,
) -> PyResult<PyResidualReport> {
    let spec = RunSpec {
        alpha0,
        u_span,
        h,
        ..RunSpec::default()
    };
    let inner = verify::negative_control(&params.inner, rho_scale, &spec, &VerifySettings::default())
        .map_err(err)?;
    Ok(PyResidualReport { inner })
}

/// Shape-constant sweep as CSV text (same schema as the CLI).
#[pyfunction]
#[pyo3(signature = (b, c3_min, c3_max, steps = 8, samples = 100))]
fn sweep_csv(b: f64, c3_min: f64, c3_max: f64, steps: usize, samples: usize) -> PyResult<String> {
    let rows = pmclab::run_sweep(b, c3_min, c3_max, steps, samples).map_err(err)?;
    Ok(pmclab::sweep_to_csv(&rows))
}

#[pymodule]
fn pmclab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyAlphaProfile>()?;
    m.add_class::<PySurfaceGrid>()?;
    m.add_class::<PyResidualReport>()?;
    m.add_function(wrap_pyfunction!(admissible_intervals, m)?)?;
    m.add_function(wrap_pyfunction!(y_squared, m)?)?;
    m.add_function(wrap_pyfunction!(a_of_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(tau_of_a, m)?)?;
    m.add_function(wrap_pyfunction!(c_modulus, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_curvature_from_a, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_curvature_closed, m)?)?;
    m.add_function(wrap_pyfunction!(identity_31_residual, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_profile, m)?)?;
    m.add_function(wrap_pyfunction!(build_grid, m)?)?;
    m.add_function(wrap_pyfunction!(run_residual_suite, m)?)?;
    m.add_function(wrap_pyfunction!(negative_control, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    Ok(())
}

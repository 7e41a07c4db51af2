//! Python bindings: lattice parameters and states, stepping, mode energies,
//! transforms, the comparison driver and the experiment helpers.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use metastab::bridge::{self, ErrorReport, Regime, RegimeSpec};
use metastab::lattice::{self, Integrator, LatticeRegime, Stepper};
use metastab::spectral::{self, Domain, GridField2D, Space, C64};
use metastab::{experiment, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Blowup { .. } | Error::Stability { .. } | Error::Budget { .. } | Error::Io(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn lattice_regime(name: &str) -> PyResult<LatticeRegime> {
    match name.to_ascii_uppercase().as_str() {
        "ETL" => Ok(LatticeRegime::Etl),
        "KG" => Ok(LatticeRegime::Kg),
        _ => Err(PyValueError::new_err(format!("unknown lattice {name:?} (ETL or KG)"))),
    }
}

fn integrator(name: &str) -> PyResult<Integrator> {
    match name {
        "leapfrog" => Ok(Integrator::Leapfrog),
        "yoshida4" => Ok(Integrator::Yoshida4),
        "suzuki4" => Ok(Integrator::Suzuki4),
        "kahan_li6" => Ok(Integrator::KahanLi6),
        _ => Err(PyValueError::new_err(format!("unknown integrator {name:?}"))),
    }
}

#[pyclass(name = "LatticeParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLatticeParams {
    inner: lattice::LatticeParams,
}

#[pymethods]
impl PyLatticeParams {
    #[new]
    #[pyo3(signature = (regime, n1, n2, alpha=0.0, beta=0.0))]
    fn new(regime: &str, n1: usize, n2: usize, alpha: f64, beta: f64) -> PyResult<Self> {
        let inner = lattice::LatticeParams::new(lattice_regime(regime)?, n1, n2, alpha, beta).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Lattice with `N2 = round((N1 + 1/2)^sigma - 1/2)`.
    #[staticmethod]
    #[pyo3(signature = (regime, n1, sigma, alpha=0.0, beta=0.0))]
    fn with_sigma(regime: &str, n1: usize, sigma: f64, alpha: f64, beta: f64) -> PyResult<Self> {
        let inner =
            lattice::LatticeParams::with_sigma(lattice_regime(regime)?, n1, sigma, alpha, beta).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn regime(&self) -> String {
        self.inner.regime.to_string()
    }
    #[getter]
    fn n1(&self) -> usize {
        self.inner.big_n1
    }
    #[getter]
    fn n2(&self) -> usize {
        self.inner.big_n2
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu()
    }
    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma()
    }
    #[getter]
    fn extents(&self) -> (usize, usize) {
        self.inner.extents()
    }
    fn default_dt(&self) -> f64 {
        self.inner.default_dt()
    }
    fn omega_sq(&self, k1: i64, k2: i64) -> f64 {
        self.inner.omega_sq(k1, k2)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("LatticeParams({}, N1={}, N2={}, alpha={}, beta={})", p.regime, p.big_n1, p.big_n2, p.alpha, p.beta)
    }
}

/// Real lattice state; `q` and `p` are flat row-major lists over
/// `(2 N1 + 1) x (2 N2 + 1)` sites, site `j` at index `j mod n`.
#[pyclass(name = "LatticeState", skip_from_py_object)]
#[derive(Clone)]
struct PyLatticeState {
    inner: lattice::LatticeState,
}

#[pymethods]
impl PyLatticeState {
    #[new]
    #[pyo3(signature = (params, q, p, t=0.0))]
    fn new(params: &PyLatticeParams, q: Vec<f64>, p: Vec<f64>, t: f64) -> PyResult<Self> {
        Ok(Self { inner: lattice::LatticeState::from_fields(&params.inner, q, p, t).map_err(to_py)? })
    }

    #[staticmethod]
    fn zeros(params: &PyLatticeParams) -> Self {
        Self { inner: lattice::LatticeState::zeros(&params.inner) }
    }

    #[getter]
    fn q(&self) -> Vec<f64> {
        self.inner.q.clone()
    }
    #[getter]
    fn p(&self) -> Vec<f64> {
        self.inner.p.clone()
    }
    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }
    fn q_at(&self, j1: i64, j2: i64) -> f64 {
        self.inner.q_at(j1, j2)
    }
    fn p_at(&self, j1: i64, j2: i64) -> f64 {
        self.inner.p_at(j1, j2)
    }
    fn sup_distance(&self, other: &PyLatticeState) -> f64 {
        self.inner.sup_distance(&other.inner)
    }
}

#[pyclass(name = "ModeSpectrum", frozen)]
struct PyModeSpectrum {
    inner: lattice::ModeSpectrum,
}

#[pymethods]
impl PyModeSpectrum {
    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }
    fn energy(&self, k1: i64, k2: i64) -> f64 {
        self.inner.energy(k1, k2)
    }
    /// Folded specific energy at `(|k1|, |k2|)`.
    fn specific_at(&self, k1: i64, k2: i64) -> f64 {
        self.inner.specific_at(k1, k2)
    }
    fn total_specific(&self) -> f64 {
        self.inner.total_specific()
    }
    /// `[(k1, k2, specific energy)]` over `Z^2_+`.
    fn folded(&self) -> Vec<(i64, i64, f64)> {
        self.inner.folded().collect()
    }
}

#[pyfunction]
#[pyo3(signature = (params, k0, c0=1.0, phase=0.0))]
fn single_mode_data(params: &PyLatticeParams, k0: (i64, i64), c0: f64, phase: f64) -> PyResult<PyLatticeState> {
    Ok(PyLatticeState { inner: lattice::single_mode_data(&params.inner, k0, c0, phase).map_err(to_py)? })
}

#[pyfunction]
fn mode_energies(state: &PyLatticeState, params: &PyLatticeParams) -> PyModeSpectrum {
    PyModeSpectrum { inner: lattice::mode_energies(&state.inner, &params.inner) }
}

#[pyfunction]
fn total_energy(state: &PyLatticeState, params: &PyLatticeParams) -> f64 {
    lattice::total_energy(&state.inner, &params.inner)
}

#[pyfunction]
fn step_leapfrog(state: &PyLatticeState, params: &PyLatticeParams, dt: f64) -> PyResult<PyLatticeState> {
    Ok(PyLatticeState { inner: lattice::step_leapfrog(&state.inner, &params.inner, dt).map_err(to_py)? })
}

/// Integrates to `t_end` with equal steps no longer than `dt` (default:
/// the lattice's default step) and returns the new state.
#[pyfunction]
#[pyo3(signature = (state, params, t_end, dt=None, method="yoshida4"))]
fn evolve(
    py: Python<'_>,
    state: &PyLatticeState,
    params: &PyLatticeParams,
    t_end: f64,
    dt: Option<f64>,
    method: &str,
) -> PyResult<PyLatticeState> {
    let stepper = Stepper::new(params.inner, integrator(method)?);
    let mut s = state.inner.clone();
    let dt = dt.unwrap_or_else(|| params.inner.default_dt());
    py.detach(|| stepper.advance_to(&mut s, t_end, dt)).map_err(to_py)?;
    Ok(PyLatticeState { inner: s })
}

#[pyfunction]
fn delta1_symbol(k: (i64, i64), sizes: (usize, usize)) -> PyResult<f64> {
    spectral::delta1_symbol(k, sizes).map_err(to_py)
}

/// Unitary DFT of a real lattice field given as a flat row-major list;
/// returns `[(re, im)]` in wrap-around order.
#[pyfunction]
fn lattice_fft(values: Vec<f64>, n1: usize, n2: usize) -> PyResult<Vec<(f64, f64)>> {
    let f = GridField2D::new(n1, n2, Domain::Lattice, Space::Physical, values.iter().map(|&v| C64::new(v, 0.0)).collect())
        .map_err(to_py)?;
    let s = spectral::forward_transform(&f).map_err(to_py)?;
    Ok(s.values().iter().map(|c| (c.re, c.im)).collect())
}

/// Runs one lattice-versus-normal-form comparison and returns the report as
/// a JSON string.
#[pyfunction]
#[pyo3(signature = (regime, n1, sigma, gamma=None, c0=1.0, t0=0.5, samples=11, alpha=None, beta=None))]
#[allow(clippy::too_many_arguments)]
fn run_comparison(
    py: Python<'_>,
    regime: &str,
    n1: usize,
    sigma: f64,
    gamma: Option<f64>,
    c0: f64,
    t0: f64,
    samples: usize,
    alpha: Option<f64>,
    beta: Option<f64>,
) -> PyResult<String> {
    let regime: Regime = regime.parse().map_err(to_py)?;
    let (a, b) = experiment::default_coefficients(regime);
    let spec = RegimeSpec::new(regime, gamma.unwrap_or_else(|| experiment::default_gamma(regime)), 1.0, 0.1)
        .map_err(to_py)?;
    let params = lattice::LatticeParams::with_sigma(regime.lattice(), n1, sigma, alpha.unwrap_or(a), beta.unwrap_or(b))
        .map_err(to_py)?;
    let rep = py.detach(|| bridge::run_comparison(&spec, &params, c0, t0, samples)).map_err(to_py)?;
    serde_json::to_string(&rep).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Validates a TOML run configuration and returns its canonical form with
/// every default written out.
#[pyfunction]
fn parse_config(text: &str) -> PyResult<String> {
    let cfg = experiment::parse_config(text).map_err(to_py)?;
    experiment::serialize_config(&cfg).map_err(to_py)
}

#[pyfunction]
fn emit_spectrum_table(report_json: &str, t: f64) -> PyResult<String> {
    let rep: ErrorReport = serde_json::from_str(report_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    experiment::emit_spectrum_table(&rep, t).map_err(to_py)
}

#[pymodule]
fn metastab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLatticeParams>()?;
    m.add_class::<PyLatticeState>()?;
    m.add_class::<PyModeSpectrum>()?;
    m.add_function(wrap_pyfunction!(single_mode_data, m)?)?;
    m.add_function(wrap_pyfunction!(mode_energies, m)?)?;
    m.add_function(wrap_pyfunction!(total_energy, m)?)?;
    m.add_function(wrap_pyfunction!(step_leapfrog, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(delta1_symbol, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_fft, m)?)?;
    m.add_function(wrap_pyfunction!(run_comparison, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    m.add_function(wrap_pyfunction!(emit_spectrum_table, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

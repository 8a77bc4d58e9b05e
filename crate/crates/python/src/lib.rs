//! Python bindings for the vnchain simulator.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use vnchain::linalg::basis_vector;
use vnchain::premeasurement::Premeasurement as CorePremeasurement;
use vnchain::scenario::{self, Format, RunOptions};
use vnchain::verify::{Corruption, VerifyOptions};
use vnchain::{
    branch_decomposition, ensemble_update, monte_carlo_update, partial_trace, relative_state, CMatrix, CVector,
    DensityOperator as CoreDensity, Projector, SpectralObservable, StateVector as CoreState, SubsystemBasis,
    SubsystemLayout, Tolerances, WeightedEnsemble as CoreEnsemble,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn layout(subsystems: Vec<(String, usize)>) -> PyResult<SubsystemLayout> {
    SubsystemLayout::new(subsystems).map_err(value_error)
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[pyclass(name = "StateVector", from_py_object)]
#[derive(Clone)]
pub struct PyStateVector {
    inner: CoreState,
}

#[pymethods]
impl PyStateVector {
    #[new]
    fn new(subsystems: Vec<(String, usize)>, amplitudes: Vec<Complex64>) -> PyResult<Self> {
        let inner = CoreState::new(layout(subsystems)?, CVector::from_vec(amplitudes)).map_err(value_error)?;
        Ok(PyStateVector { inner })
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.layout().labels().iter().map(|s| s.to_string()).collect()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.layout().dims()
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().iter().copied().collect()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn tensor(&self, other: &PyStateVector) -> PyResult<PyStateVector> {
        let inner = self.inner.tensor(&other.inner).map_err(value_error)?;
        Ok(PyStateVector { inner })
    }

    fn density(&self) -> PyResult<PyDensityOperator> {
        let inner = self.inner.density().map_err(value_error)?;
        Ok(PyDensityOperator { inner })
    }

    /// Reduced state after tracing out the given subsystems.
    fn partial_trace(&self, traced: Vec<String>) -> PyResult<PyDensityOperator> {
        let inner = partial_trace(&self.inner, &traced).map_err(value_error)?;
        Ok(PyDensityOperator { inner })
    }

    /// Normalised state of the other subsystems relative to `subject` on `label`.
    fn relative_state(&self, label: &str, subject: Vec<Complex64>) -> PyResult<PyStateVector> {
        let inner = relative_state(&self.inner, label, &CVector::from_vec(subject), &Tolerances::default())
            .map_err(value_error)?;
        Ok(PyStateVector { inner })
    }

    fn __repr__(&self) -> String {
        format!("StateVector({})", self.inner.layout())
    }
}

#[pyclass(name = "DensityOperator", from_py_object)]
#[derive(Clone)]
pub struct PyDensityOperator {
    inner: CoreDensity,
}

#[pymethods]
impl PyDensityOperator {
    #[new]
    fn new(subsystems: Vec<(String, usize)>, matrix: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let layout = layout(subsystems)?;
        let d = layout.total_dim();
        if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
            return Err(PyValueError::new_err(format!("expected a {d}x{d} matrix")));
        }
        let m = CMatrix::from_fn(d, d, |i, j| matrix[i][j]);
        let inner = CoreDensity::new(layout, m).map_err(value_error)?;
        Ok(PyDensityOperator { inner })
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.layout().labels().iter().map(|s| s.to_string()).collect()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.layout().dims()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        rows(self.inner.matrix())
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn partial_trace(&self, traced: Vec<String>) -> PyResult<PyDensityOperator> {
        let inner = partial_trace(&self.inner, &traced).map_err(value_error)?;
        Ok(PyDensityOperator { inner })
    }

    fn __repr__(&self) -> String {
        format!("DensityOperator({})", self.inner.layout())
    }
}

#[pyclass(name = "Premeasurement", from_py_object)]
#[derive(Clone)]
pub struct PyPremeasurement {
    inner: CorePremeasurement,
}

#[pymethods]
impl PyPremeasurement {
    /// Ideal premeasurement of `diag(eigenvalues)` on the object with
    /// canonical pointer states and ready state `|0⟩`.
    #[staticmethod]
    fn ideal(
        object_label: &str,
        eigenvalues: Vec<f64>,
        instrument_label: &str,
        instrument_dim: usize,
    ) -> PyResult<Self> {
        let object = SubsystemLayout::single(object_label, eigenvalues.len()).map_err(value_error)?;
        let instrument = SubsystemLayout::single(instrument_label, instrument_dim).map_err(value_error)?;
        let measured = SpectralObservable::diagonal(object, &eigenvalues).map_err(value_error)?;
        let states: Vec<CVector> = (0..measured.len().min(instrument_dim))
            .map(|k| basis_vector(instrument_dim, k))
            .collect();
        let pointer = SpectralObservable::pointer_for_states(instrument.clone(), &states).map_err(value_error)?;
        let basis = SubsystemBasis::new(instrument_label, instrument_dim, states).map_err(value_error)?;
        let ready = CoreState::basis(instrument, 0).map_err(value_error)?;
        let inner = CorePremeasurement::ideal(measured, pointer, &basis, ready).map_err(value_error)?;
        Ok(PyPremeasurement { inner })
    }

    /// Random premeasurement on `A` by `B`, optionally dressed.
    #[staticmethod]
    #[pyo3(signature = (seed, object_dim, instrument_dim, dressed = true))]
    fn random(seed: u64, object_dim: usize, instrument_dim: usize, dressed: bool) -> PyResult<Self> {
        let mut rng = vnchain::random::rng(seed);
        let ideal = CorePremeasurement::random_ideal(&mut rng, object_dim, instrument_dim).map_err(value_error)?;
        let inner = if dressed {
            let d = ideal.random_dressings(&mut rng);
            CorePremeasurement::exact(&ideal, &d).map_err(value_error)?
        } else {
            ideal
        };
        Ok(PyPremeasurement { inner })
    }

    fn phase_swapped(&self) -> PyResult<PyPremeasurement> {
        let inner = self.inner.phase_swapped().map_err(value_error)?;
        Ok(PyPremeasurement { inner })
    }

    fn evolve(&self, object_state: &PyStateVector) -> PyResult<PyStateVector> {
        let inner = self.inner.evolve(&object_state.inner).map_err(value_error)?;
        Ok(PyStateVector { inner })
    }

    /// `(pointer index, weight)` of every branch of the evolved state.
    fn branch_weights(&self, object_state: &PyStateVector) -> PyResult<Vec<(usize, f64)>> {
        let out = self.inner.evolve(&object_state.inner).map_err(value_error)?;
        let d = branch_decomposition(&out, self.inner.pointer(), &Tolerances::default()).map_err(value_error)?;
        Ok(d.branches.iter().map(|b| (b.index, b.weight)).collect())
    }

    /// `(condition, max residual, pass)` for the three defining conditions.
    #[pyo3(signature = (trials = 20, seed = 0))]
    fn check_all(&self, trials: usize, seed: u64) -> Vec<(String, f64, bool)> {
        self.inner
            .check_all(trials, seed)
            .into_iter()
            .map(|r| (r.condition, r.max_residual, r.pass))
            .collect()
    }

    fn unitary(&self) -> Vec<Vec<Complex64>> {
        rows(self.inner.unitary())
    }
}

#[pyclass(name = "WeightedEnsemble", from_py_object)]
#[derive(Clone)]
pub struct PyWeightedEnsemble {
    inner: CoreEnsemble,
}

fn event(ens: &CoreEnsemble, label: &str, state: Vec<Complex64>) -> PyResult<Projector> {
    let d = ens.layout().dim_of(label).map_err(value_error)?;
    let support = SubsystemLayout::single(label, d).map_err(value_error)?;
    Projector::rank_one(support, &CVector::from_vec(state)).map_err(value_error)
}

#[pymethods]
impl PyWeightedEnsemble {
    #[new]
    fn new(members: Vec<(f64, PyStateVector)>) -> PyResult<Self> {
        let inner = CoreEnsemble::new(members.into_iter().map(|(w, s)| (w, s.inner)).collect()).map_err(value_error)?;
        Ok(PyWeightedEnsemble { inner })
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.weights()
    }

    fn density(&self) -> PyResult<PyDensityOperator> {
        let inner = self.inner.density().map_err(value_error)?;
        Ok(PyDensityOperator { inner })
    }

    /// Exact update on the event "subsystem `label` found in `state`":
    /// `(new weights, occurrence probability, aggregate state)`.
    fn update(&self, label: &str, state: Vec<Complex64>) -> PyResult<(Vec<f64>, f64, PyDensityOperator)> {
        let p = event(&self.inner, label, state)?;
        let r = ensemble_update(&self.inner, &p, &Tolerances::default()).map_err(value_error)?;
        let weights = (0..self.inner.len()).map(|k| r.weight_of(k)).collect();
        Ok((weights, r.occurrence_probability, PyDensityOperator { inner: r.aggregate }))
    }

    /// Empirical updated weights from `n_samples` simulated preparations.
    fn monte_carlo(&self, label: &str, state: Vec<Complex64>, n_samples: u64, seed: u64) -> PyResult<Vec<f64>> {
        let p = event(&self.inner, label, state)?;
        let mc = monte_carlo_update(&self.inner, &p, n_samples, seed).map_err(value_error)?;
        Ok(mc.weights())
    }
}

#[pyfunction]
fn builtins() -> Vec<&'static str> {
    scenario::BUILTINS.iter().map(|(n, _)| *n).collect()
}

#[pyfunction]
fn emit(name: &str) -> PyResult<&'static str> {
    scenario::builtin(name).ok_or_else(|| PyValueError::new_err(format!("unknown builtin `{name}`")))
}

/// Runs a builtin (by name) or a JSON scenario document and returns the
/// rendered report.
#[pyfunction]
#[pyo3(signature = (source, seed = 0, format = "json", tol = None, dump_states = false))]
fn run_scenario(source: &str, seed: u64, format: &str, tol: Option<f64>, dump_states: bool) -> PyResult<String> {
    let text = scenario::builtin(source).unwrap_or(source);
    let s = scenario::parse_scenario(text).map_err(value_error)?;
    let format: Format = format.parse().map_err(value_error)?;
    let mut options = RunOptions {
        seed,
        dump_states,
        ..RunOptions::default()
    };
    if let Some(t) = tol {
        options.tolerance = t;
    }
    let report = scenario::run(&s, &options).map_err(value_error)?;
    Ok(report.render(format))
}

/// Runs the property suites; returns `(all passed, JSON summary)`.
#[pyfunction]
#[pyo3(signature = (max_object_dim = 4, max_instrument_dim = 6, trials = 100, seed = 0, corrupt = "none"))]
fn verify(
    max_object_dim: usize,
    max_instrument_dim: usize,
    trials: usize,
    seed: u64,
    corrupt: &str,
) -> PyResult<(bool, String)> {
    let corrupt: Corruption = corrupt.parse().map_err(value_error)?;
    let report = vnchain::verify::verify(&VerifyOptions {
        max_object_dim,
        max_instrument_dim,
        trials,
        seed,
        corrupt,
        jobs: None,
    });
    Ok((report.pass, report.summary_json()))
}

#[pymodule]
#[pyo3(name = "vnchain")]
fn vnchain_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStateVector>()?;
    m.add_class::<PyDensityOperator>()?;
    m.add_class::<PyPremeasurement>()?;
    m.add_class::<PyWeightedEnsemble>()?;
    m.add_function(wrap_pyfunction!(builtins, m)?)?;
    m.add_function(wrap_pyfunction!(emit, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}

//! Python bindings for the lattice-boson simulator: occupation bases,
//! Bose-Hubbard lattices, Gross-Pitaevskii ground states, condensate and
//! product states, Runge-Kutta propagation, and density-matrix
//! observables. Site indices are 0-based throughout, matching the Rust
//! API.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: bhsim::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Occupation-number basis with a fixed particle total and site count.
#[pyclass(frozen, module = "pybhsim")]
struct Basis {
    inner: bhsim::Basis,
}

#[pymethods]
impl Basis {
    #[new]
    fn new(particles: u32, sites: usize) -> PyResult<Self> {
        Ok(Self { inner: bhsim::Basis::new(particles, sites).map_err(err)? })
    }

    #[getter]
    fn particles(&self) -> u32 {
        self.inner.particles()
    }

    #[getter]
    fn sites(&self) -> usize {
        self.inner.sites()
    }

    #[getter]
    fn dimension(&self) -> u64 {
        self.inner.dimension()
    }

    fn rank(&self, occupation: Vec<u32>) -> PyResult<u64> {
        self.inner.rank(&occupation).map_err(err)
    }

    fn unrank(&self, index: u64) -> PyResult<Vec<u32>> {
        self.inner.unrank(index).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.dimension() as usize
    }

    fn __repr__(&self) -> String {
        format!(
            "Basis(particles={}, sites={}, dimension={})",
            self.inner.particles(),
            self.inner.sites(),
            self.inner.dimension()
        )
    }
}

/// Number of occupation vectors of length `sites` summing to `particles`.
#[pyfunction]
fn dimension(particles: u32, sites: usize) -> PyResult<u64> {
    bhsim::dimension(particles, sites).map_err(err)
}

/// Matrix element of `a†_to a_from`: the target occupation and the
/// amplitude `sqrt(n_from (n_to + 1))`, or `None` if the source is empty.
#[pyfunction]
fn hop(
    occupation: Vec<u32>,
    from_site: usize,
    to_site: usize,
) -> PyResult<Option<(Vec<u32>, f64)>> {
    if from_site == to_site || from_site >= occupation.len() || to_site >= occupation.len() {
        return Err(PyValueError::new_err(format!(
            "hop needs two distinct sites below {}",
            occupation.len()
        )));
    }
    Ok(bhsim::hop(&occupation, from_site, to_site))
}

/// `U = g / (N - 1)`.
#[pyfunction]
fn interaction_from_g(g: f64, particles: u32) -> PyResult<f64> {
    bhsim::interaction_from_g(g, particles).map_err(err)
}

/// Symmetric hopping matrix plus on-site interaction strength.
#[pyclass(frozen, module = "pybhsim")]
struct LatticeSpec {
    inner: bhsim::LatticeSpec,
}

#[pymethods]
impl LatticeSpec {
    /// Six-site ring of two three-well blocks: intra-block bonds `j1`,
    /// inter-block bonds `j2`.
    #[staticmethod]
    fn ring(j1: f64, j2: f64) -> Self {
        Self { inner: bhsim::ring_spec(j1, j2) }
    }

    /// Open chain of `sites` wells with uniform bond strength `j`.
    #[staticmethod]
    fn chain(j: f64, sites: usize) -> PyResult<Self> {
        if sites < 2 {
            return Err(PyValueError::new_err("a chain needs at least two sites"));
        }
        Ok(Self { inner: bhsim::chain_spec(j, sites) })
    }

    fn with_interaction(&self, interaction: f64) -> Self {
        Self { inner: self.inner.clone().with_interaction(interaction) }
    }

    #[getter]
    fn interaction(&self) -> f64 {
        self.inner.interaction()
    }

    #[getter]
    fn site_count(&self) -> usize {
        self.inner.site_count()
    }

    fn hopping(&self) -> Vec<Vec<f64>> {
        let m = self.inner.site_count();
        (0..m).map(|i| (0..m).map(|j| self.inner.hopping()[(i, j)]).collect()).collect()
    }

    /// Restriction to an isolated subsystem.
    fn restricted_to(&self, sites: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.restricted_to(&sites).map_err(err)? })
    }

    /// `H · psi`, matrix-free.
    fn apply(&self, state: &StateVector) -> PyResult<StateVector> {
        Ok(StateVector { inner: bhsim::apply_hamiltonian(&self.inner, &state.inner).map_err(err)? })
    }
}

/// Discrete Gross-Pitaevskii ground state.
#[pyclass(frozen, module = "pybhsim")]
struct MeanFieldState {
    inner: bhsim::MeanFieldState,
}

#[pymethods]
impl MeanFieldState {
    #[getter]
    fn coefficients(&self) -> Vec<Complex64> {
        self.inner.coefficients.clone()
    }

    #[getter]
    fn chemical_potential(&self) -> f64 {
        self.inner.chemical_potential
    }

    #[getter]
    fn norm_target(&self) -> f64 {
        self.inner.norm_target
    }

    /// Coefficients rescaled to unit squared norm.
    fn unit_coefficients(&self) -> Vec<Complex64> {
        self.inner.unit_coefficients()
    }
}

/// Ground state of the stationary discrete Gross-Pitaevskii equation on
/// `spec` under the constraint `sum |c_i|^2 = norm_target`.
#[pyfunction]
#[pyo3(signature = (spec, g, norm_target, tol=1e-12))]
fn solve_ground_state(
    spec: &LatticeSpec,
    g: f64,
    norm_target: f64,
    tol: f64,
) -> PyResult<MeanFieldState> {
    Ok(MeanFieldState {
        inner: bhsim::solve_ground_state(&spec.inner, g, norm_target, tol).map_err(err)?,
    })
}

/// Max-norm residual of a candidate stationary solution.
#[pyfunction]
fn gpe_residual(state: &MeanFieldState, spec: &LatticeSpec, g: f64) -> f64 {
    bhsim::gpe_residual(&state.inner, &spec.inner, g)
}

/// Complex amplitude vector over an occupation basis.
#[pyclass(frozen, module = "pybhsim")]
struct StateVector {
    inner: bhsim::StateVector,
}

#[pymethods]
impl StateVector {
    /// Unit amplitude on one occupation state.
    #[staticmethod]
    fn fock(basis: &Basis, occupation: Vec<u32>) -> PyResult<Self> {
        Ok(Self {
            inner: bhsim::StateVector::fock(basis.inner.clone(), &occupation).map_err(err)?,
        })
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    #[getter]
    fn dimension(&self) -> u64 {
        self.inner.basis().dimension()
    }

    #[getter]
    fn sites(&self) -> usize {
        self.inner.basis().sites()
    }

    #[getter]
    fn particles(&self) -> u32 {
        self.inner.basis().particles()
    }
}

/// Condensate of `particles` bosons sharing the mode `coefficients`
/// (which must have unit squared norm).
#[pyfunction]
fn condensate_state(coefficients: Vec<Complex64>, particles: u32) -> PyResult<StateVector> {
    let sites: Vec<usize> = (0..coefficients.len()).collect();
    let spec = bhsim::CondensateSpec::new(coefficients, particles, sites).map_err(err)?;
    Ok(StateVector { inner: bhsim::condensate_state(&spec).map_err(err)? })
}

/// Tensor product with the first factor on the leading sites.
#[pyfunction]
fn product_state(a: &StateVector, b: &StateVector) -> StateVector {
    StateVector { inner: bhsim::product_state(&a.inner, &b.inner) }
}

/// One classical fourth-order Runge-Kutta step of `psi' = -i H psi`.
#[pyfunction]
fn rk4_step(spec: &LatticeSpec, state: &StateVector, dt: f64) -> PyResult<StateVector> {
    Ok(StateVector { inner: bhsim::rk4_step(&spec.inner, &state.inner, dt).map_err(err)? })
}

/// Normalized reduced single-particle density matrix over a site subset.
#[pyclass(frozen, module = "pybhsim")]
struct Spdm {
    inner: bhsim::Spdm,
}

#[pymethods]
impl Spdm {
    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.dim();
        (0..m).map(|i| (0..m).map(|j| self.inner.matrix[(i, j)]).collect()).collect()
    }

    #[getter]
    fn normalization(&self) -> f64 {
        self.inner.normalization
    }

    #[getter]
    fn sites(&self) -> Vec<usize> {
        self.inner.sites.clone()
    }
}

#[pyfunction]
fn spdm(state: &StateVector, sites: Vec<usize>) -> PyResult<Spdm> {
    Ok(Spdm { inner: bhsim::spdm(&state.inner, &sites).map_err(err)? })
}

/// Purity of a reduced density matrix, rescaled to [0, 1].
#[pyfunction]
fn purity(sigma: &Spdm) -> PyResult<f64> {
    Ok(bhsim::purity(&sigma.inner, sigma.inner.dim()).map_err(err)?.value)
}

#[pyfunction]
fn two_site_purity(sigma: &Spdm, j: usize, k: usize) -> PyResult<f64> {
    bhsim::two_site_purity(&sigma.inner, j, k).map_err(err)
}

#[pyfunction]
fn imbalance(sigma: &Spdm, j: usize, k: usize) -> PyResult<f64> {
    bhsim::imbalance(&sigma.inner, j, k).map_err(err)
}

/// Average interference contrast of two sites, in [0, 1].
#[pyfunction]
fn contrast(sigma: &Spdm, j: usize, k: usize) -> PyResult<f64> {
    bhsim::contrast(&sigma.inner, j, k).map_err(err)
}

#[pyfunction]
fn filling_levels(state: &StateVector) -> Vec<f64> {
    bhsim::filling_levels(&state.inner)
}

/// Sampled observables over a propagation.
#[pyclass(frozen, module = "pybhsim")]
struct TimeSeries {
    inner: bhsim::TimeSeries,
}

#[pymethods]
impl TimeSeries {
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    fn norms(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.norm).collect()
    }

    fn energies(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.energy).collect()
    }

    /// Per-sample filling levels, one list per site.
    fn fillings(&self) -> Vec<Vec<f64>> {
        let sites = self.inner.records.first().map(|r| r.fillings.len()).unwrap_or(0);
        (0..sites).map(|j| self.inner.filling(j)).collect()
    }

    /// Reduced density matrix over `sites` at one sample index.
    fn spdm_at(&self, index: usize, sites: Vec<usize>) -> PyResult<Spdm> {
        if index >= self.inner.len() {
            return Err(PyValueError::new_err(format!(
                "sample {index} out of range for {} samples",
                self.inner.len()
            )));
        }
        Ok(Spdm { inner: self.inner.spdm_at(index, &sites).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Propagate `state` to `t_final` with fixed-step Runge-Kutta, sampling
/// every `sample_every` steps.
#[pyfunction]
#[pyo3(signature = (spec, state, t_final, dt, sample_every=1, renormalize=false))]
fn evolve(
    spec: &LatticeSpec,
    state: &StateVector,
    t_final: f64,
    dt: f64,
    sample_every: usize,
    renormalize: bool,
) -> PyResult<TimeSeries> {
    let mut plan = bhsim::PropagationPlan::new(t_final, dt)
        .and_then(|p| p.with_sample_every(sample_every))
        .map_err(err)?;
    plan.renormalize = renormalize;
    let series = bhsim::evolve(&spec.inner, &state.inner, &plan, &bhsim::Observers::default())
        .map_err(err)?;
    Ok(TimeSeries { inner: series })
}

#[pymodule]
fn pybhsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Basis>()?;
    m.add_class::<LatticeSpec>()?;
    m.add_class::<MeanFieldState>()?;
    m.add_class::<StateVector>()?;
    m.add_class::<Spdm>()?;
    m.add_class::<TimeSeries>()?;
    m.add_function(wrap_pyfunction!(dimension, m)?)?;
    m.add_function(wrap_pyfunction!(hop, m)?)?;
    m.add_function(wrap_pyfunction!(interaction_from_g, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(gpe_residual, m)?)?;
    m.add_function(wrap_pyfunction!(condensate_state, m)?)?;
    m.add_function(wrap_pyfunction!(product_state, m)?)?;
    m.add_function(wrap_pyfunction!(rk4_step, m)?)?;
    m.add_function(wrap_pyfunction!(spdm, m)?)?;
    m.add_function(wrap_pyfunction!(purity, m)?)?;
    m.add_function(wrap_pyfunction!(two_site_purity, m)?)?;
    m.add_function(wrap_pyfunction!(imbalance, m)?)?;
    m.add_function(wrap_pyfunction!(contrast, m)?)?;
    m.add_function(wrap_pyfunction!(filling_levels, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    Ok(())
}

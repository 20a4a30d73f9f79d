//! Bose-Hubbard Hamiltonian over an arbitrary symmetric hopping graph:
//!
//! `H = -sum_{ij} J_ij a†_i a_j + (U/2) sum_j n_j (n_j - 1)`
//!
//! Application to state vectors is matrix-free: each output amplitude is an
//! independent gather over the at most `2 * bonds + 1` connected basis
//! states, with target ranks recomputed combinadically on the fly. A dense
//! form is available below a size cap for oracle checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::kernels::{self, CHUNK};

/// Size cap for the dense-matrix oracles.
pub const DENSE_CAP: usize = 5000;

/// Symmetric hopping matrix plus on-site interaction strength.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    site_count: usize,
    hopping: DMatrix<f64>,
    interaction: f64,
}

impl LatticeSpec {
    /// Build from an explicit hopping matrix, which must be symmetric with a
    /// zero diagonal.
    pub fn from_hopping(hopping: DMatrix<f64>, interaction: f64) -> Result<Self> {
        if !hopping.is_square() {
            return Err(Error::InvalidParameter("hopping matrix must be square".into()));
        }
        let m = hopping.nrows();
        for i in 0..m {
            if hopping[(i, i)] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "hopping diagonal must be zero, got J[{i}][{i}] = {}",
                    hopping[(i, i)]
                )));
            }
            for j in 0..i {
                if hopping[(i, j)] != hopping[(j, i)] {
                    return Err(Error::InvalidParameter(format!(
                        "hopping must be symmetric, J[{i}][{j}] != J[{j}][{i}]"
                    )));
                }
            }
        }
        Ok(Self { site_count: m, hopping, interaction })
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn hopping(&self) -> &DMatrix<f64> {
        &self.hopping
    }

    pub fn interaction(&self) -> f64 {
        self.interaction
    }

    pub fn with_interaction(mut self, interaction: f64) -> Self {
        self.interaction = interaction;
        self
    }

    /// Overwrite one symmetric bond.
    pub fn set_bond(&mut self, i: usize, j: usize, strength: f64) -> Result<()> {
        if i == j || i >= self.site_count || j >= self.site_count {
            return Err(Error::InvalidParameter(format!("invalid bond ({i}, {j})")));
        }
        self.hopping[(i, j)] = strength;
        self.hopping[(j, i)] = strength;
        Ok(())
    }

    /// Nonzero undirected bonds `(i, j, J_ij)` with `i < j`.
    pub fn bonds(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.site_count {
            for j in (i + 1)..self.site_count {
                let v = self.hopping[(i, j)];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Restriction to a site subset (an isolated subsystem), keeping U.
    pub fn restricted_to(&self, sites: &[usize]) -> Result<Self> {
        let m = sites.len();
        if m == 0 {
            return Err(Error::InvalidSubset("subsystem must contain at least one site".into()));
        }
        for &s in sites {
            if s >= self.site_count {
                return Err(Error::InvalidSubset(format!("site {s} out of range")));
            }
        }
        let mut hopping = DMatrix::zeros(m, m);
        for (a, &sa) in sites.iter().enumerate() {
            for (b, &sb) in sites.iter().enumerate() {
                if a != b {
                    hopping[(a, b)] = self.hopping[(sa, sb)];
                }
            }
        }
        Ok(Self { site_count: m, hopping, interaction: self.interaction })
    }
}

/// Six-site ring of two three-site subsystems: intra-subsystem bonds
/// (1,2),(2,3),(4,5),(5,6) carry `j1`, the inter-subsystem bonds (3,4),(6,1)
/// carry `j2` (1-based labels). Interaction starts at zero.
pub fn ring_spec(j1: f64, j2: f64) -> LatticeSpec {
    let mut hopping = DMatrix::zeros(6, 6);
    for (i, j, v) in [(0, 1, j1), (1, 2, j1), (3, 4, j1), (4, 5, j1), (2, 3, j2), (5, 0, j2)] {
        hopping[(i, j)] = v;
        hopping[(j, i)] = v;
    }
    LatticeSpec { site_count: 6, hopping, interaction: 0.0 }
}

/// Open nearest-neighbor chain of `m` sites with uniform bond strength.
/// Interaction starts at zero.
pub fn chain_spec(j: f64, m: usize) -> LatticeSpec {
    assert!(m >= 2, "a chain needs at least two sites");
    let mut hopping = DMatrix::zeros(m, m);
    for i in 0..m - 1 {
        hopping[(i, i + 1)] = j;
        hopping[(i + 1, i)] = j;
    }
    LatticeSpec { site_count: m, hopping, interaction: 0.0 }
}

/// On-site interaction for a macroscopic interaction strength `g` at particle
/// number `n`: `U = g / (N - 1)`.
pub fn interaction_from_g(g: f64, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "U = g/(N-1) requires at least two particles, got N = {n}"
        )));
    }
    Ok(g / (n as f64 - 1.0))
}

/// Complex amplitude vector over a fixed occupation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zeros(basis: Basis) -> Self {
        let dim = basis.dimension() as usize;
        Self { basis, amplitudes: vec![Complex64::default(); dim] }
    }

    /// Unit amplitude on a single occupation state.
    pub fn fock(basis: Basis, occ: &[u32]) -> Result<Self> {
        let index = basis.rank(occ)? as usize;
        let mut state = Self::zeros(basis);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn from_amplitudes(basis: Basis, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() as u64 != basis.dimension() {
            return Err(Error::InvalidState(format!(
                "amplitude count {} does not match basis dimension {}",
                amplitudes.len(),
                basis.dimension()
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        kernels::norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            kernels::scale(&mut self.amplitudes, 1.0 / n);
        }
    }

    /// Hermitian inner product `<self, other>`.
    pub fn dot(&self, other: &Self) -> Complex64 {
        kernels::dot(&self.amplitudes, &other.amplitudes)
    }
}

/// `H · psi`, computed matrix-free.
pub fn apply_hamiltonian(spec: &LatticeSpec, psi: &StateVector) -> Result<StateVector> {
    if psi.basis().sites() != spec.site_count {
        return Err(Error::InvalidState(format!(
            "state has {} sites, lattice has {}",
            psi.basis().sites(),
            spec.site_count
        )));
    }
    let mut out = StateVector::zeros(psi.basis().clone());
    apply_into(spec, psi.basis(), 0.0, psi.amplitudes(), out.amplitudes_mut());
    Ok(out)
}

/// Core gather kernel: `dst = (H - shift) · src` over `basis`.
///
/// Data-parallel over fixed-size output chunks; each chunk walks its
/// occupation vectors in rank order and recomputes hop-target ranks by
/// temporarily moving one particle.
pub(crate) fn apply_into(
    spec: &LatticeSpec,
    basis: &Basis,
    shift: f64,
    src: &[Complex64],
    dst: &mut [Complex64],
) {
    let bonds = spec.bonds();
    let half_u = 0.5 * spec.interaction;
    let m = basis.sites();
    let n = basis.particles();
    let dim = basis.dimension() as usize;
    debug_assert_eq!(src.len(), dim);
    debug_assert_eq!(dst.len(), dim);

    dst.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, out)| {
        let start = ci * CHUNK;
        let chunk_len = out.len();
        let mut occ = vec![0u32; m];
        basis.unrank_into(start as u64, &mut occ);
        for (k, slot) in out.iter_mut().enumerate() {
            let i = start + k;
            // (U/2) sum n(n-1) = (U/2) (sum n^2 - N), minus the frame shift
            let sq: u32 = occ.iter().map(|&x| x * x).sum();
            let diag = half_u * (sq as f64 - n as f64) - shift;
            let mut acc = src[i] * diag;
            for &(a, b, j) in &bonds {
                let na = occ[a];
                let nb = occ[b];
                if na > 0 {
                    // gather from the state with one particle moved a -> b
                    let amp = basis.sqrt_int(na * (nb + 1));
                    occ[a] = na - 1;
                    occ[b] = nb + 1;
                    let y = basis.rank_unchecked(&occ) as usize;
                    occ[a] = na;
                    occ[b] = nb;
                    debug_assert!(y < dim);
                    acc += unsafe { *src.get_unchecked(y) } * (-j * amp);
                }
                if nb > 0 {
                    let amp = basis.sqrt_int(nb * (na + 1));
                    occ[a] = na + 1;
                    occ[b] = nb - 1;
                    let y = basis.rank_unchecked(&occ) as usize;
                    occ[a] = na;
                    occ[b] = nb;
                    debug_assert!(y < dim);
                    acc += unsafe { *src.get_unchecked(y) } * (-j * amp);
                }
            }
            *slot = acc;
            if k + 1 < chunk_len {
                Basis::next_occupation(&mut occ);
            }
        }
    });
}

/// Explicit Hermitian matrix of `H`, for oracle checks on small bases.
pub fn dense_hamiltonian(spec: &LatticeSpec, basis: &Basis) -> Result<DMatrix<Complex64>> {
    dense_hamiltonian_with_cap(spec, basis, DENSE_CAP)
}

pub fn dense_hamiltonian_with_cap(
    spec: &LatticeSpec,
    basis: &Basis,
    cap: usize,
) -> Result<DMatrix<Complex64>> {
    let real = dense_real(spec, basis, cap)?;
    Ok(real.map(|v| Complex64::new(v, 0.0)))
}

/// Real symmetric dense form (the Hamiltonian is real in the Fock basis).
pub(crate) fn dense_real(spec: &LatticeSpec, basis: &Basis, cap: usize) -> Result<DMatrix<f64>> {
    if basis.sites() != spec.site_count {
        return Err(Error::InvalidState(format!(
            "basis has {} sites, lattice has {}",
            basis.sites(),
            spec.site_count
        )));
    }
    let dim = basis.dimension();
    if dim as usize > cap {
        return Err(Error::OracleTooLarge { dimension: dim, cap });
    }
    let dim = dim as usize;
    let bonds = spec.bonds();
    let half_u = 0.5 * spec.interaction;
    let n = basis.particles();
    let mut h = DMatrix::zeros(dim, dim);
    for (col, occ) in basis.iter().enumerate() {
        let sq: u32 = occ.iter().map(|&x| x * x).sum();
        h[(col, col)] += half_u * (sq as f64 - n as f64);
        for &(a, b, j) in &bonds {
            for (from, to) in [(a, b), (b, a)] {
                if let Some((target, amp)) = crate::basis::hop(&occ, from, to) {
                    let row = basis.rank(&target).expect("hop stays in basis") as usize;
                    h[(row, col)] += -j * amp;
                }
            }
        }
    }
    Ok(h)
}

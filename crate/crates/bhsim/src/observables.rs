//! Reduced single-particle density matrices and their derived quantities:
//! filling levels, subsystem/total purity, two-site purity, squared particle
//! imbalance, and the average interference contrast.
//!
//! Correlators are accumulated matrix-free from the state vector; no
//! operator matrices are materialized. All reductions use the deterministic
//! chunked summation from `kernels`, so results are bit-reproducible across
//! worker counts. Expectation values are normalized by `<psi|psi>`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::kernels::CHUNK;
use crate::lattice::StateVector;

/// Normalized (unit-trace) single-particle density matrix over a site
/// subset, together with the trace it was normalized by (the particle count
/// currently in the subset; equal to N for the full-site set).
#[derive(Debug, Clone)]
pub struct Spdm {
    pub matrix: DMatrix<Complex64>,
    pub normalization: f64,
    pub sites: Vec<usize>,
}

impl Spdm {
    /// Wrap an unnormalized correlator block `<a†_i a_j>` over `sites`.
    pub fn from_correlators(correlators: DMatrix<Complex64>, sites: Vec<usize>) -> Result<Self> {
        if correlators.nrows() != sites.len() || !correlators.is_square() {
            return Err(Error::InvalidSubset(format!(
                "correlator block is {}x{} for {} sites",
                correlators.nrows(),
                correlators.ncols(),
                sites.len()
            )));
        }
        let trace: f64 = correlators.diagonal().iter().map(|z| z.re).sum();
        if trace <= 0.0 {
            return Err(Error::InvalidSubset(format!(
                "subset {sites:?} holds no particles; its density matrix is undefined"
            )));
        }
        Ok(Self { matrix: correlators.map(|z| z / trace), normalization: trace, sites })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Hermiticity, unit trace, and positive semidefiniteness within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        let m = self.dim();
        for i in 0..m {
            for j in 0..m {
                if (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        let trace: f64 = self.matrix.diagonal().iter().map(|z| z.re).sum();
        if (trace - 1.0).abs() > tol {
            return false;
        }
        let eig = nalgebra::SymmetricEigen::new(self.matrix.clone());
        eig.eigenvalues.iter().all(|&l| l > -1e-10)
    }
}

/// Purity of a reduced density matrix, rescaled to [0, 1].
#[derive(Debug, Clone)]
pub struct PurityReport {
    pub value: f64,
    pub site_subset: Vec<usize>,
    pub m_effective: usize,
}

fn validate_sites(basis: &Basis, sites: &[usize]) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::InvalidSubset("site subset must be non-empty".into()));
    }
    for &s in sites {
        if s >= basis.sites() {
            return Err(Error::InvalidSubset(format!(
                "site {s} out of range for {} sites",
                basis.sites()
            )));
        }
    }
    let mut seen = vec![false; basis.sites()];
    for &s in sites {
        if seen[s] {
            return Err(Error::InvalidSubset(format!("site {s} listed twice")));
        }
        seen[s] = true;
    }
    Ok(())
}

struct CorrelatorPartial {
    norm_sqr: f64,
    diag: Vec<f64>,
    upper: Vec<Complex64>,
}

/// Unnormalized one-body correlators `<a†_i a_j>` over `sites`, divided by
/// `<psi|psi>` (so the diagonal sums to the particle count even under norm
/// drift). Single sweep over the basis computing every pair at once.
pub fn correlators(psi: &StateVector, sites: &[usize]) -> Result<DMatrix<Complex64>> {
    correlators_raw(psi.basis(), psi.amplitudes(), sites)
}

pub(crate) fn correlators_raw(
    basis: &Basis,
    src: &[Complex64],
    sites: &[usize],
) -> Result<DMatrix<Complex64>> {
    validate_sites(basis, sites)?;
    let m = basis.sites();
    let ms = sites.len();
    let pairs: Vec<(usize, usize)> = (0..ms)
        .flat_map(|a| ((a + 1)..ms).map(move |b| (a, b)))
        .collect();
    let dim = basis.dimension() as usize;
    let n_chunks = dim.div_ceil(CHUNK);

    let partials: Vec<CorrelatorPartial> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let start = ci * CHUNK;
            let end = (start + CHUNK).min(dim);
            let mut occ = vec![0u32; m];
            basis.unrank_into(start as u64, &mut occ);
            let mut part = CorrelatorPartial {
                norm_sqr: 0.0,
                diag: vec![0.0; ms],
                upper: vec![Complex64::default(); pairs.len()],
            };
            for x in start..end {
                let ax = src[x];
                let w = ax.norm_sqr();
                part.norm_sqr += w;
                for (a, &site) in sites.iter().enumerate() {
                    part.diag[a] += occ[site] as f64 * w;
                }
                if w != 0.0 || ax != Complex64::default() {
                    for (p, &(a, b)) in pairs.iter().enumerate() {
                        // <a†_i a_j> term with i = sites[a], j = sites[b]
                        let (i, j) = (sites[a], sites[b]);
                        let nj = occ[j];
                        if nj > 0 {
                            let ni = occ[i];
                            let amp = basis.sqrt_int(nj * (ni + 1));
                            occ[j] = nj - 1;
                            occ[i] = ni + 1;
                            let y = basis.rank_unchecked(&occ) as usize;
                            occ[j] = nj;
                            occ[i] = ni;
                            part.upper[p] += src[y].conj() * ax * amp;
                        }
                    }
                }
                if x + 1 < end {
                    Basis::next_occupation(&mut occ);
                }
            }
            part
        })
        .collect();

    let mut norm_sqr = 0.0;
    let mut diag = vec![0.0; ms];
    let mut upper = vec![Complex64::default(); pairs.len()];
    for part in partials {
        norm_sqr += part.norm_sqr;
        for (d, v) in diag.iter_mut().zip(part.diag) {
            *d += v;
        }
        for (u, v) in upper.iter_mut().zip(part.upper) {
            *u += v;
        }
    }
    if norm_sqr == 0.0 {
        return Err(Error::InvalidState("cannot take expectations in the zero state".into()));
    }

    let mut out = DMatrix::zeros(ms, ms);
    for a in 0..ms {
        out[(a, a)] = Complex64::new(diag[a] / norm_sqr, 0.0);
    }
    for (p, &(a, b)) in pairs.iter().enumerate() {
        let v = upper[p] / norm_sqr;
        out[(a, b)] = v;
        out[(b, a)] = v.conj();
    }
    Ok(out)
}

/// Reduced single-particle density matrix over a site subset, normalized to
/// the subset's own trace.
pub fn spdm(psi: &StateVector, sites: &[usize]) -> Result<Spdm> {
    let corr = correlators(psi, sites)?;
    Spdm::from_correlators(corr, sites.to_vec())
}

/// `P = M/(M-1) tr(sigma^2) - 1/(M-1)`, rescaled so that a pure condensate
/// gives 1 and maximal fragmentation over `m_effective` modes gives 0.
pub fn purity(sigma: &Spdm, m_effective: usize) -> Result<PurityReport> {
    if m_effective < 2 {
        return Err(Error::InvalidDimension(m_effective));
    }
    if sigma.dim() != m_effective {
        return Err(Error::InvalidSubset(format!(
            "density matrix is {}x{} but m_effective = {m_effective}",
            sigma.dim(),
            sigma.dim()
        )));
    }
    let tr_sq: f64 = sigma.matrix.iter().map(|z| z.norm_sqr()).sum();
    let m = m_effective as f64;
    let value = m / (m - 1.0) * tr_sq - 1.0 / (m - 1.0);
    assert!(
        (-1e-12..=1.0 + 1e-12).contains(&value),
        "purity {value} outside [0, 1]; density matrix is unphysical"
    );
    Ok(PurityReport { value, site_subset: sigma.sites.clone(), m_effective })
}

fn pair_entries(sigma_full: &Spdm, j: usize, k: usize) -> Result<(f64, f64, f64)> {
    let m = sigma_full.dim();
    if j == k || j >= m || k >= m {
        return Err(Error::InvalidSubset(format!("invalid site pair ({j}, {k})")));
    }
    let nj = sigma_full.matrix[(j, j)].re;
    let nk = sigma_full.matrix[(k, k)].re;
    if nj + nk == 0.0 {
        return Err(Error::UndefinedPair { j, k });
    }
    Ok((nj, nk, sigma_full.matrix[(j, k)].norm_sqr()))
}

/// Two-site purity `[(n_j - n_k)^2 + 4 |<a†_j a_k>|^2] / (n_j + n_k)^2`;
/// scale-invariant, so normalized and raw correlators give the same value.
pub fn two_site_purity(sigma_full: &Spdm, j: usize, k: usize) -> Result<f64> {
    let (nj, nk, off_sqr) = pair_entries(sigma_full, j, k)?;
    let denom = nj + nk;
    Ok(((nj - nk).powi(2) + 4.0 * off_sqr) / (denom * denom))
}

/// Squared particle imbalance `[(n_j - n_k) / (n_j + n_k)]^2`.
pub fn imbalance(sigma_full: &Spdm, j: usize, k: usize) -> Result<f64> {
    let (nj, nk, _) = pair_entries(sigma_full, j, k)?;
    Ok(((nj - nk) / (nj + nk)).powi(2))
}

/// Average interference contrast `2 |<a†_j a_k>| / (n_j + n_k)` of sites
/// `j` and `k`, in [0, 1].
pub fn contrast(sigma_full: &Spdm, j: usize, k: usize) -> Result<f64> {
    let (nj, nk, off_sqr) = pair_entries(sigma_full, j, k)?;
    Ok(2.0 * off_sqr.sqrt() / (nj + nk))
}

/// Expectation values of the number operator on every site; sums to the
/// particle count.
pub fn filling_levels(psi: &StateVector) -> Vec<f64> {
    filling_levels_raw(psi.basis(), psi.amplitudes())
}

pub(crate) fn filling_levels_raw(basis: &Basis, src: &[Complex64]) -> Vec<f64> {
    let m = basis.sites();
    let dim = basis.dimension() as usize;
    let n_chunks = dim.div_ceil(CHUNK);
    let partials: Vec<(f64, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let start = ci * CHUNK;
            let end = (start + CHUNK).min(dim);
            let mut occ = vec![0u32; m];
            basis.unrank_into(start as u64, &mut occ);
            let mut diag = vec![0.0; m];
            let mut norm_sqr = 0.0;
            for x in start..end {
                let w = src[x].norm_sqr();
                norm_sqr += w;
                for (d, &n) in diag.iter_mut().zip(occ.iter()) {
                    *d += n as f64 * w;
                }
                if x + 1 < end {
                    Basis::next_occupation(&mut occ);
                }
            }
            (norm_sqr, diag)
        })
        .collect();
    let mut norm_sqr = 0.0;
    let mut diag = vec![0.0; m];
    for (w, d) in partials {
        norm_sqr += w;
        for (acc, v) in diag.iter_mut().zip(d) {
            *acc += v;
        }
    }
    if norm_sqr > 0.0 {
        for d in &mut diag {
            *d /= norm_sqr;
        }
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::StateVector;
    use crate::state::{condensate_state, CondensateSpec};
    use crate::testutil::random_state;

    fn real_coeffs(values: &[f64]) -> Vec<Complex64> {
        values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }

    #[test]
    fn fock_state_fillings() {
        let psi = StateVector::fock(Basis::new(5, 3).unwrap(), &[5, 0, 0]).unwrap();
        assert_eq!(filling_levels(&psi), vec![5.0, 0.0, 0.0]);
    }

    #[test]
    fn fock_state_spdm_is_diagonal() {
        let psi = StateVector::fock(Basis::new(6, 3).unwrap(), &[3, 2, 1]).unwrap();
        let sigma = spdm(&psi, &[0, 1, 2]).unwrap();
        assert!((sigma.normalization - 6.0).abs() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let expect =
                    if i == j { [3.0, 2.0, 1.0][i] / 6.0 } else { 0.0 };
                assert!((sigma.matrix[(i, j)].re - expect).abs() < 1e-13);
                assert!(sigma.matrix[(i, j)].im.abs() < 1e-15);
            }
        }
        assert!(sigma.is_physical(1e-12));
    }

    #[test]
    fn condensate_spdm_is_rank_one() {
        // complex coefficients exercise the phase bookkeeping
        let c = vec![
            Complex64::from_polar(0.5, 0.3),
            Complex64::from_polar(0.7, -1.1),
            Complex64::new((1.0f64 - 0.25 - 0.49).sqrt(), 0.0),
        ];
        let spec = CondensateSpec::new(c.clone(), 10, vec![0, 1, 2]).unwrap();
        let psi = condensate_state(&spec).unwrap();
        let sigma = spdm(&psi, &[0, 1, 2]).unwrap();
        // one-body correlators of a condensate factorize: <a†_i a_j> = N c̄_i c_j
        for i in 0..3 {
            for j in 0..3 {
                let expect = c[i].conj() * c[j];
                assert!(
                    (sigma.matrix[(i, j)] - expect).norm() < 1e-10,
                    "entry ({i},{j}): {} vs {expect}",
                    sigma.matrix[(i, j)]
                );
            }
        }
        let report = purity(&sigma, 3).unwrap();
        assert!((report.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn condensate_fillings_scale_with_coefficients() {
        let c = real_coeffs(&[0.6, 0.8]);
        let spec = CondensateSpec::new(c, 10, vec![0, 1]).unwrap();
        let psi = condensate_state(&spec).unwrap();
        let fill = filling_levels(&psi);
        assert!((fill[0] - 10.0 * 0.36).abs() < 1e-11);
        assert!((fill[1] - 10.0 * 0.64).abs() < 1e-11);
        assert!((fill.iter().sum::<f64>() - 10.0).abs() < 1e-11);
    }

    #[test]
    fn maximally_mixed_purity_is_zero() {
        let m = 4;
        let eye = DMatrix::from_diagonal_element(m, m, Complex64::new(1.0, 0.0));
        let sigma = Spdm::from_correlators(eye, vec![0, 1, 2, 3]).unwrap();
        let report = purity(&sigma, 4).unwrap();
        assert!(report.value.abs() < 1e-14);
    }

    #[test]
    fn purity_requires_two_modes() {
        let one = DMatrix::from_diagonal_element(1, 1, Complex64::new(1.0, 0.0));
        let sigma = Spdm::from_correlators(one, vec![0]).unwrap();
        assert!(matches!(purity(&sigma, 1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn purity_invariant_under_global_phase_and_relabeling() {
        let basis = Basis::new(4, 3).unwrap();
        let psi = random_state(&basis, 3);
        let p0 = purity(&spdm(&psi, &[0, 1, 2]).unwrap(), 3).unwrap().value;

        let mut phased = psi.clone();
        let phase = Complex64::from_polar(1.0, 0.73);
        for a in phased.amplitudes_mut() {
            *a *= phase;
        }
        let p1 = purity(&spdm(&phased, &[0, 1, 2]).unwrap(), 3).unwrap().value;
        assert!((p0 - p1).abs() < 1e-13);

        // permuting the subset order conjugates sigma by a permutation
        let p2 = purity(&spdm(&psi, &[2, 0, 1]).unwrap(), 3).unwrap().value;
        assert!((p0 - p2).abs() < 1e-13);
    }

    #[test]
    fn symmetric_pure_dimer_pair_quantities() {
        let r = 0.5f64.sqrt();
        let spec = CondensateSpec::new(real_coeffs(&[r, r]), 6, vec![0, 1]).unwrap();
        let psi = condensate_state(&spec).unwrap();
        let sigma = spdm(&psi, &[0, 1]).unwrap();
        assert!((two_site_purity(&sigma, 0, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((contrast(&sigma, 0, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(imbalance(&sigma, 0, 1).unwrap().abs() < 1e-13);
    }

    #[test]
    fn diagonal_pair_limits() {
        // equal fillings, no coherence: P_jk = 0; empty second site: P_jk = 1
        let balanced = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        let sigma = Spdm::from_correlators(balanced, vec![0, 1]).unwrap();
        assert!(two_site_purity(&sigma, 0, 1).unwrap().abs() < 1e-14);
        assert!(contrast(&sigma, 0, 1).unwrap().abs() < 1e-14);

        let lopsided = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]));
        let sigma = Spdm::from_correlators(lopsided, vec![0, 1]).unwrap();
        assert!((two_site_purity(&sigma, 0, 1).unwrap() - 1.0).abs() < 1e-14);
        assert!((imbalance(&sigma, 0, 1).unwrap() - 1.0).abs() < 1e-14);

        let three_to_one = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]));
        let sigma = Spdm::from_correlators(three_to_one, vec![0, 1]).unwrap();
        assert!((imbalance(&sigma, 0, 1).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn contrast_identity_on_random_states() {
        // nu^2 = P_jk - I_jk, and P_jk >= nu^2
        let basis = Basis::new(5, 4).unwrap();
        for seed in 0..8 {
            let psi = random_state(&basis, seed);
            let sigma = spdm(&psi, &[0, 1, 2, 3]).unwrap();
            for (j, k) in [(0usize, 1usize), (1, 2), (0, 3), (2, 3)] {
                let nu = contrast(&sigma, j, k).unwrap();
                let pjk = two_site_purity(&sigma, j, k).unwrap();
                let ijk = imbalance(&sigma, j, k).unwrap();
                assert!((nu * nu - (pjk - ijk)).abs() < 1e-12, "seed {seed} pair ({j},{k})");
                assert!(pjk + 1e-15 >= nu * nu);
                assert!((0.0..=1.0 + 1e-12).contains(&nu));
            }
        }
    }

    #[test]
    fn two_site_purity_matches_block_renormalization() {
        // the closed form equals the generic purity of the renormalized block
        let basis = Basis::new(4, 4).unwrap();
        let psi = random_state(&basis, 42);
        let full = spdm(&psi, &[0, 1, 2, 3]).unwrap();
        for (j, k) in [(0usize, 1usize), (1, 3)] {
            let closed = two_site_purity(&full, j, k).unwrap();
            let block = spdm(&psi, &[j, k]).unwrap();
            let generic = purity(&block, 2).unwrap().value;
            assert!((closed - generic).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_errors() {
        let psi = StateVector::fock(Basis::new(2, 3).unwrap(), &[0, 2, 0]).unwrap();
        let sigma = spdm(&psi, &[0, 1, 2]).unwrap();
        assert!(matches!(
            two_site_purity(&sigma, 0, 2),
            Err(Error::UndefinedPair { j: 0, k: 2 })
        ));
        assert!(matches!(contrast(&sigma, 1, 1), Err(Error::InvalidSubset(_))));
    }

    #[test]
    fn subset_errors() {
        let psi = StateVector::fock(Basis::new(2, 3).unwrap(), &[1, 1, 0]).unwrap();
        assert!(matches!(spdm(&psi, &[]), Err(Error::InvalidSubset(_))));
        assert!(matches!(spdm(&psi, &[3]), Err(Error::InvalidSubset(_))));
        assert!(matches!(spdm(&psi, &[1, 1]), Err(Error::InvalidSubset(_))));
    }

    #[test]
    fn subsystem_spdm_normalizes_to_subset_trace() {
        let psi = StateVector::fock(Basis::new(6, 4).unwrap(), &[3, 1, 2, 0]).unwrap();
        let sigma = spdm(&psi, &[0, 1]).unwrap();
        assert!((sigma.normalization - 4.0).abs() < 1e-12);
        let trace: f64 = sigma.matrix.diagonal().iter().map(|z| z.re).sum();
        assert!((trace - 1.0).abs() < 1e-14);
    }
}

//! Many-body state construction: condensates from mean-field coefficients
//! and tensor products of subsystem states embedded in a combined basis.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::kernels::CHUNK;
use crate::lattice::StateVector;

/// A pure condensate: `particle_count` bosons sharing the single-particle
/// mode given by `coefficients` (unit squared norm), occupying the listed
/// global sites.
#[derive(Debug, Clone)]
pub struct CondensateSpec {
    pub coefficients: Vec<Complex64>,
    pub particle_count: u32,
    pub site_indices: Vec<usize>,
}

impl CondensateSpec {
    pub fn new(
        coefficients: Vec<Complex64>,
        particle_count: u32,
        site_indices: Vec<usize>,
    ) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidSpec("a condensate needs at least one site".into()));
        }
        if site_indices.len() != coefficients.len() {
            return Err(Error::InvalidSpec(format!(
                "{} coefficients but {} site indices",
                coefficients.len(),
                site_indices.len()
            )));
        }
        let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() >= 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "coefficients must have unit squared norm, got {norm}"
            )));
        }
        Ok(Self { coefficients, particle_count, site_indices })
    }
}

/// Log-factorial table via compensated summation; exact to a few ulps,
/// which keeps amplitudes accurate to ~1e-13 relative for N up to ~100.
fn ln_factorials(n: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    out.push(0.0);
    for k in 1..=n {
        let term = (k as f64).ln();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out.push(sum);
    }
    out
}

/// The many-body state with amplitude
/// `sqrt(N! / (n_1! … n_M!)) · c_1^{n_1} … c_M^{n_M}`
/// on each occupation `(n_1, …, n_M)`. Amplitudes are evaluated in log
/// space so that factorials of large `N` never overflow.
pub fn condensate_state(spec: &CondensateSpec) -> Result<StateVector> {
    let m = spec.coefficients.len();
    let basis = Basis::new(spec.particle_count, m)?;
    let lnfact = ln_factorials(spec.particle_count);
    let ln_mag: Vec<f64> = spec.coefficients.iter().map(|c| c.norm().ln()).collect();
    let phase: Vec<f64> = spec.coefficients.iter().map(|c| c.arg()).collect();
    let half_ln_n_fact = 0.5 * lnfact[spec.particle_count as usize];

    let mut out = StateVector::zeros(basis.clone());
    out.amplitudes_mut().par_chunks_mut(CHUNK).enumerate().for_each(|(ci, slots)| {
        let start = ci * CHUNK;
        let chunk_len = slots.len();
        let mut occ = vec![0u32; m];
        basis.unrank_into(start as u64, &mut occ);
        for (k, slot) in slots.iter_mut().enumerate() {
            let mut ln_amp = half_ln_n_fact;
            let mut arg = 0.0;
            let mut vanishes = false;
            for (j, &n) in occ.iter().enumerate() {
                if n > 0 {
                    if spec.coefficients[j] == Complex64::default() {
                        vanishes = true;
                        break;
                    }
                    ln_amp += n as f64 * ln_mag[j] - 0.5 * lnfact[n as usize];
                    arg += n as f64 * phase[j];
                }
            }
            *slot = if vanishes {
                Complex64::default()
            } else {
                Complex64::from_polar(ln_amp.exp(), arg)
            };
            if k + 1 < chunk_len {
                Basis::next_occupation(&mut occ);
            }
        }
    });
    Ok(out)
}

/// Tensor product of two fixed-number states, embedded in the combined
/// basis with the first factor on the leading sites. Combined-basis states
/// whose leading block does not hold exactly the first factor's particle
/// count get amplitude zero; the output norm is the product of the input
/// norms.
pub fn product_state(a: &StateVector, b: &StateVector) -> StateVector {
    let (na, ma) = (a.basis().particles(), a.basis().sites());
    let (nb, mb) = (b.basis().particles(), b.basis().sites());
    let combined = Basis::new(na + nb, ma + mb).expect("combined basis fits");
    let mut out = StateVector::zeros(combined.clone());

    let mut occ = vec![0u32; ma + mb];
    let mut occ_a = vec![0u32; ma];
    occ_a[0] = na;
    for amp_a in a.amplitudes() {
        let mut occ_b = vec![0u32; mb];
        occ_b[0] = nb;
        occ[..ma].copy_from_slice(&occ_a);
        for amp_b in b.amplitudes() {
            if *amp_b != Complex64::default() || *amp_a != Complex64::default() {
                occ[ma..].copy_from_slice(&occ_b);
                let idx = combined.rank_unchecked(&occ) as usize;
                out.amplitudes_mut()[idx] = amp_a * amp_b;
            }
            Basis::next_occupation(&mut occ_b);
        }
        Basis::next_occupation(&mut occ_a);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{filling_levels, purity, spdm};
    use crate::testutil::random_state;

    fn real_coeffs(values: &[f64]) -> Vec<Complex64> {
        values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }

    #[test]
    fn all_particles_on_one_site() {
        let spec =
            CondensateSpec::new(real_coeffs(&[1.0, 0.0, 0.0]), 5, vec![0, 1, 2]).unwrap();
        let state = condensate_state(&spec).unwrap();
        let index = state.basis().rank(&[5, 0, 0]).unwrap() as usize;
        for (i, amp) in state.amplitudes().iter().enumerate() {
            if i == index {
                assert!((amp - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            } else {
                assert_eq!(*amp, Complex64::default());
            }
        }
    }

    #[test]
    fn dimer_condensate_amplitudes_by_hand() {
        let r = 0.5f64.sqrt();
        let spec = CondensateSpec::new(real_coeffs(&[r, r]), 2, vec![0, 1]).unwrap();
        let state = condensate_state(&spec).unwrap();
        let basis = state.basis();
        let expect = [(vec![2, 0], 0.5), (vec![1, 1], r), (vec![0, 2], 0.5)];
        for (occ, want) in expect {
            let idx = basis.rank(&occ).unwrap() as usize;
            assert!((state.amplitudes()[idx].re - want).abs() < 1e-14, "{occ:?}");
        }
        assert!((state.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn condensate_is_normalized_at_large_n() {
        let spec = CondensateSpec::new(
            real_coeffs(&[0.3604 * 2f64.sqrt(), 0.4902 * 2f64.sqrt(), 0.3604 * 2f64.sqrt()]),
            35,
            vec![0, 1, 2],
        );
        // the quoted four-decimal coefficients are not exactly unit norm
        assert!(spec.is_err());
        let c1 = 0.3604 * 2f64.sqrt();
        let c2 = (1.0 - 2.0 * c1 * c1).sqrt();
        let spec = CondensateSpec::new(real_coeffs(&[c1, c2, c1]), 35, vec![0, 1, 2]).unwrap();
        let state = condensate_state(&spec).unwrap();
        assert!((state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn condensate_purity_is_one() {
        let c1 = 0.3604 * 2f64.sqrt();
        let c2 = (1.0 - 2.0 * c1 * c1).sqrt();
        let spec = CondensateSpec::new(real_coeffs(&[c1, c2, c1]), 35, vec![0, 1, 2]).unwrap();
        let state = condensate_state(&spec).unwrap();
        let sigma = spdm(&state, &[0, 1, 2]).unwrap();
        let report = purity(&sigma, 3).unwrap();
        assert!((report.value - 1.0).abs() < 1e-10, "P = {}", report.value);
    }

    #[test]
    fn condensate_fillings_follow_coefficients() {
        let r = 0.5f64.sqrt();
        let spec = CondensateSpec::new(real_coeffs(&[r, r]), 9, vec![0, 1]).unwrap();
        let state = condensate_state(&spec).unwrap();
        for n in filling_levels(&state) {
            assert!((n - 4.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_normalized_coefficients() {
        let bad = CondensateSpec::new(real_coeffs(&[0.9, 0.1]), 3, vec![0, 1]);
        assert!(matches!(bad, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn product_embeds_single_particles() {
        let a = StateVector::fock(Basis::new(1, 2).unwrap(), &[1, 0]).unwrap();
        let b = StateVector::fock(Basis::new(1, 2).unwrap(), &[0, 1]).unwrap();
        let prod = product_state(&a, &b);
        assert_eq!(prod.basis().particles(), 2);
        assert_eq!(prod.basis().sites(), 4);
        let idx = prod.basis().rank(&[1, 0, 0, 1]).unwrap() as usize;
        for (i, amp) in prod.amplitudes().iter().enumerate() {
            if i == idx {
                assert!((amp - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            } else {
                assert_eq!(*amp, Complex64::default());
            }
        }
    }

    #[test]
    fn product_norm_is_multiplicative() {
        let basis_a = Basis::new(3, 2).unwrap();
        let basis_b = Basis::new(2, 2).unwrap();
        for seed in 0..5 {
            let mut a = random_state(&basis_a, seed);
            let b = random_state(&basis_b, seed + 50);
            // leave a un-normalized to exercise the general contract
            a.amplitudes_mut()[0] *= 3.0;
            let prod = product_state(&a, &b);
            assert!((prod.norm() - a.norm() * b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn product_fillings_match_factors() {
        let r = 0.5f64.sqrt();
        let a = condensate_state(
            &CondensateSpec::new(real_coeffs(&[r, r]), 4, vec![0, 1]).unwrap(),
        )
        .unwrap();
        let b = condensate_state(
            &CondensateSpec::new(real_coeffs(&[0.6, 0.8]), 2, vec![2, 3]).unwrap(),
        )
        .unwrap();
        let prod = product_state(&a, &b);
        let fill = filling_levels(&prod);
        let fill_a = filling_levels(&a);
        let fill_b = filling_levels(&b);
        assert!((fill[0] - fill_a[0]).abs() < 1e-12);
        assert!((fill[1] - fill_a[1]).abs() < 1e-12);
        assert!((fill[2] - fill_b[0]).abs() < 1e-12);
        assert!((fill[3] - fill_b[1]).abs() < 1e-12);
    }

    #[test]
    fn cross_blocks_of_product_spdm_vanish() {
        let a = condensate_state(
            &CondensateSpec::new(real_coeffs(&[0.6, 0.8]), 2, vec![0, 1]).unwrap(),
        )
        .unwrap();
        let b = condensate_state(
            &CondensateSpec::new(
                real_coeffs(&[0.5f64.sqrt(), 0.5f64.sqrt()]),
                2,
                vec![2, 3],
            )
            .unwrap(),
        )
        .unwrap();
        let prod = product_state(&a, &b);
        let sigma = spdm(&prod, &[0, 1, 2, 3]).unwrap();
        for i in 0..2 {
            for j in 2..4 {
                assert!(sigma.matrix[(i, j)].norm() < 1e-15, "sigma[{i}][{j}]");
                assert!(sigma.matrix[(j, i)].norm() < 1e-15);
            }
        }
    }

    #[test]
    fn two_equal_pure_blocks_give_total_purity_two_fifths() {
        // product of two pure condensates with N/2 each: tr sigma^2 = 1/2,
        // so P_tot = (6/5)(1/2) - 1/5 = 0.4, independent of N
        for n_half in [2u32, 5, 10] {
            let c1 = 0.3604 * 2f64.sqrt();
            let c2 = (1.0 - 2.0 * c1 * c1).sqrt();
            let trimer =
                CondensateSpec::new(real_coeffs(&[c1, c2, c1]), n_half, vec![0, 1, 2]).unwrap();
            let one = condensate_state(&trimer).unwrap();
            let prod = product_state(&one, &one);
            let sigma = spdm(&prod, &[0, 1, 2, 3, 4, 5]).unwrap();
            let report = purity(&sigma, 6).unwrap();
            assert!((report.value - 0.4).abs() < 1e-12, "N/2 = {n_half}: {}", report.value);
        }
    }
}

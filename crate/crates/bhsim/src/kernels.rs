//! Data-parallel complex-vector kernels with deterministic reductions.
//!
//! All reductions partition the index space into fixed-size chunks, reduce
//! each chunk sequentially, and combine the per-chunk partials in chunk
//! order. Results are therefore bit-identical for any worker count.

use num_complex::Complex64;
use rayon::prelude::*;

/// Partition width for parallel loops and reductions. Fixed so that results
/// do not depend on the thread count.
pub(crate) const CHUNK: usize = 4096;

/// Sum of per-chunk partials, combined in chunk order.
pub(crate) fn chunked_sum<T, F>(len: usize, per_chunk: F) -> T
where
    T: Send + std::iter::Sum<T>,
    F: Fn(usize, usize) -> T + Sync,
{
    let n_chunks = len.div_ceil(CHUNK);
    let partials: Vec<T> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(len);
            per_chunk(start, end)
        })
        .collect();
    partials.into_iter().sum()
}

pub(crate) fn norm_sqr(x: &[Complex64]) -> f64 {
    chunked_sum(x.len(), |a, b| x[a..b].iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Hermitian inner product `<x, y> = sum conj(x_i) y_i`.
pub(crate) fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    chunked_sum(x.len(), |a, b| {
        x[a..b].iter().zip(&y[a..b]).map(|(u, v)| u.conj() * v).sum::<Complex64>()
    })
}

/// First Runge-Kutta stage: `acc[i] = k[i]` and
/// `stage[i] = psi[i] + alpha * k[i]` in a single sweep.
pub(crate) fn start_accumulator(
    acc: &mut [Complex64],
    stage: &mut [Complex64],
    psi: &[Complex64],
    alpha: Complex64,
    k: &[Complex64],
) {
    acc.par_chunks_mut(CHUNK)
        .zip(stage.par_chunks_mut(CHUNK))
        .zip(psi.par_chunks(CHUNK).zip(k.par_chunks(CHUNK)))
        .for_each(|((accs, stages), (psis, ks))| {
            for i in 0..accs.len() {
                let kv = ks[i];
                accs[i] = kv;
                stages[i] = psis[i] + alpha * kv;
            }
        });
}

/// Fused Runge-Kutta stage update:
/// `acc[i] += weight * k[i]` and `stage[i] = psi[i] + alpha * k[i]`
/// in a single sweep (one pass of memory traffic instead of two).
pub(crate) fn accumulate_and_stage(
    acc: &mut [Complex64],
    weight: f64,
    stage: &mut [Complex64],
    psi: &[Complex64],
    alpha: Complex64,
    k: &[Complex64],
) {
    acc.par_chunks_mut(CHUNK)
        .zip(stage.par_chunks_mut(CHUNK))
        .zip(psi.par_chunks(CHUNK).zip(k.par_chunks(CHUNK)))
        .for_each(|((accs, stages), (psis, ks))| {
            for i in 0..accs.len() {
                let kv = ks[i];
                accs[i] += weight * kv;
                stages[i] = psis[i] + alpha * kv;
            }
        });
}

/// Final Runge-Kutta combination: `psi[i] += alpha * (acc[i] + k[i])`.
pub(crate) fn finish_step(
    psi: &mut [Complex64],
    alpha: Complex64,
    acc: &[Complex64],
    k: &[Complex64],
) {
    psi.par_chunks_mut(CHUNK)
        .zip(acc.par_chunks(CHUNK).zip(k.par_chunks(CHUNK)))
        .for_each(|(psis, (accs, ks))| {
            for i in 0..psis.len() {
                psis[i] += alpha * (accs[i] + ks[i]);
            }
        });
}

pub(crate) fn scale(dst: &mut [Complex64], alpha: f64) {
    dst.par_chunks_mut(CHUNK).for_each(|d| {
        for z in d {
            *z *= alpha;
        }
    });
}

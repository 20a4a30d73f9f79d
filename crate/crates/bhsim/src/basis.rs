//! Bosonic occupation-number basis: enumeration, ranking and unranking of
//! occupation vectors with a fixed particle total, plus the single-hop
//! connectivity used by the matrix-free Hamiltonian.
//!
//! Basis states are the length-`M` tuples of non-negative counts summing to
//! `N`, ordered lexicographically descending, so `(N, 0, …, 0)` has rank 0 and
//! `(0, …, 0, N)` has rank `dimension - 1`. Ranks are computed combinadically
//! from a cached Pascal table; no basis list is ever stored.

use crate::error::{Error, Result};

/// Number of occupation vectors of length `sites` summing to `particles`
/// (stars and bars).
pub fn dimension(particles: u32, sites: usize) -> Result<u64> {
    if sites == 0 {
        return Err(Error::InvalidBasis("site count must be at least 1".into()));
    }
    // C(N + M - 1, M - 1) with overflow checking.
    let n = particles as u128 + sites as u128 - 1;
    let k = sites as u128 - 1;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul(n - k + i)
            .ok_or_else(|| Error::InvalidBasis("basis dimension overflows".into()))?;
        acc /= i;
    }
    u64::try_from(acc).map_err(|_| Error::InvalidBasis("basis dimension overflows u64".into()))
}

/// Matrix element of `a†_to a_from` on an occupation vector.
///
/// Returns the target occupation and the bosonic amplitude
/// `sqrt(n_from · (n_to + 1))`, or `None` when the source site is empty.
/// The hopping sign convention (the `-J` prefactor) is applied by the
/// Hamiltonian, not here.
pub fn hop(occ: &[u32], from: usize, to: usize) -> Option<(Vec<u32>, f64)> {
    assert!(from != to, "hop requires distinct sites");
    assert!(from < occ.len() && to < occ.len(), "hop site out of range");
    if occ[from] == 0 {
        return None;
    }
    let amp = ((occ[from] as f64) * ((occ[to] + 1) as f64)).sqrt();
    let mut target = occ.to_vec();
    target[from] -= 1;
    target[to] += 1;
    Some((target, amp))
}

/// Fixed-(N, M) occupation basis with cached combinatorial tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    particles: u32,
    sites: usize,
    dim: u64,
    /// `table[m * (N + 1) + x]` = number of length-`m` occupation vectors
    /// summing to `x`; rows `m = 0..=M`.
    table: Vec<u64>,
    /// Shifted cumulative rows for branch-free ranking:
    /// `rank_table[m * (N + 2) + x] = table[m][x - 1]`, zero at `x = 0`.
    rank_table: Vec<u64>,
    /// `sqrt_tab[k] = sqrt(k)` for the hop amplitudes, `k <= N * (N + 1)`.
    sqrt_tab: Vec<f64>,
}

impl Basis {
    pub fn new(particles: u32, sites: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::InvalidBasis("site count must be at least 1".into()));
        }
        let width = particles as usize + 1;
        let mut table = vec![0u64; (sites + 1) * width];
        table[0] = 1; // one empty composition of 0
        for m in 1..=sites {
            for x in 0..width {
                let below = table[(m - 1) * width + x];
                let left = if x == 0 { 0 } else { table[m * width + x - 1] };
                table[m * width + x] = left.checked_add(below).ok_or_else(|| {
                    Error::InvalidBasis("basis dimension overflows u64".into())
                })?;
            }
        }
        let mut rank_table = vec![0u64; (sites + 1) * (width + 1)];
        for m in 0..=sites {
            for x in 1..=width {
                rank_table[m * (width + 1) + x] = table[m * width + x - 1];
            }
        }
        let dim = table[sites * width + particles as usize];
        let max_prod = particles as usize * (particles as usize + 1);
        let sqrt_tab = (0..=max_prod).map(|k| (k as f64).sqrt()).collect();
        Ok(Self { particles, sites, dim, table, rank_table, sqrt_tab })
    }

    pub fn particles(&self) -> u32 {
        self.particles
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dimension(&self) -> u64 {
        self.dim
    }

    #[inline]
    fn width(&self) -> usize {
        self.particles as usize + 1
    }

    /// `sqrt(k)` by table lookup; `k` must not exceed `N * (N + 1)`, which
    /// bounds every hop-amplitude product.
    #[inline]
    pub(crate) fn sqrt_int(&self, k: u32) -> f64 {
        debug_assert!((k as usize) < self.sqrt_tab.len());
        unsafe { *self.sqrt_tab.get_unchecked(k as usize) }
    }

    /// Rank of a valid occupation vector; no validation. Branch-free: the
    /// shifted table row makes the "no states precede" case a zero lookup.
    #[inline]
    pub(crate) fn rank_unchecked(&self, occ: &[u32]) -> u64 {
        let width = self.width() + 1;
        let mut rank = 0u64;
        let mut rem = self.particles;
        for j in 0..self.sites - 1 {
            let n = unsafe { *occ.get_unchecked(j) };
            // count of states with a larger n at site j given the prefix
            let idx = (self.sites - j) * width + (rem - n) as usize;
            debug_assert!(idx < self.rank_table.len());
            rank += unsafe { *self.rank_table.get_unchecked(idx) };
            rem -= n;
        }
        rank
    }

    pub fn rank(&self, occ: &[u32]) -> Result<u64> {
        if occ.len() != self.sites {
            return Err(Error::InvalidState(format!(
                "occupation has {} sites, basis has {}",
                occ.len(),
                self.sites
            )));
        }
        let total: u64 = occ.iter().map(|&n| n as u64).sum();
        if total != self.particles as u64 {
            return Err(Error::InvalidState(format!(
                "occupation sums to {total}, basis holds {} particles",
                self.particles
            )));
        }
        Ok(self.rank_unchecked(occ))
    }

    /// Inverse of [`rank`](Self::rank), writing into a caller-provided buffer.
    pub(crate) fn unrank_into(&self, index: u64, occ: &mut [u32]) {
        debug_assert!(index < self.dim);
        let width = self.width();
        let mut offset = index;
        let mut rem = self.particles;
        for j in 0..self.sites - 1 {
            let row = &self.table[(self.sites - j) * width..(self.sites - j + 1) * width];
            // preceding(k) = row[rem - k - 1] is decreasing in k; find the
            // smallest k with preceding(k) <= offset.
            let mut lo = 0u32;
            let mut hi = rem;
            while lo < hi {
                let mid = (lo + hi) / 2;
                let preceding = if mid == rem { 0 } else { row[(rem - mid - 1) as usize] };
                if preceding <= offset {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let k = lo;
            if k < rem {
                offset -= row[(rem - k - 1) as usize];
            }
            occ[j] = k;
            rem -= k;
        }
        occ[self.sites - 1] = rem;
    }

    pub fn unrank(&self, index: u64) -> Result<Vec<u32>> {
        if index >= self.dim {
            return Err(Error::IndexOutOfRange { index, dimension: self.dim });
        }
        let mut occ = vec![0u32; self.sites];
        self.unrank_into(index, &mut occ);
        Ok(occ)
    }

    /// Advance `occ` to its successor in descending lexicographic order.
    /// Returns `false` (leaving `occ` unchanged) on the last state.
    pub(crate) fn next_occupation(occ: &mut [u32]) -> bool {
        let m = occ.len();
        let mut j = m - 1;
        while j > 0 && occ[j - 1] == 0 {
            j -= 1;
        }
        if j == 0 {
            return false;
        }
        let carry = occ[m - 1];
        occ[m - 1] = 0;
        occ[j - 1] -= 1;
        occ[j] = carry + 1;
        true
    }

    /// Iterate occupation vectors in rank order.
    pub fn iter(&self) -> BasisIter {
        let mut first = vec![0u32; self.sites];
        first[0] = self.particles;
        BasisIter { occ: first, remaining: self.dim }
    }
}

pub struct BasisIter {
    occ: Vec<u32>,
    remaining: u64,
}

impl Iterator for BasisIter {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let out = self.occ.clone();
        self.remaining -= 1;
        if self.remaining > 0 {
            Basis::next_occupation(&mut self.occ);
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }

    fn count(self) -> usize {
        self.remaining as usize
    }
}

//! k-subset enumeration in colexicographic order, ranking, and seeded
//! sampling without replacement.
//!
//! Colex order on sorted subsets `c_0 < c_1 < … < c_{k-1}` compares from the
//! largest element down; its rank is `Σ C(c_i, i + 1)` (combinatorial number
//! system), which makes chunked parallel enumeration and order-independent
//! tie-breaking straightforward.

use std::collections::HashSet;

use rand::Rng;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) / (i + 1) is C(n, i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Colex rank of a sorted subset.
pub fn colex_rank(subset: &[usize]) -> u128 {
    subset.iter().enumerate().map(|(i, &c)| binomial(c, i + 1)).sum()
}

/// Inverse of [`colex_rank`] for `k`-subsets.
pub fn colex_unrank(mut rank: u128, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for i in (0..k).rev() {
        // largest c with C(c, i+1) <= rank
        let mut c = i;
        while binomial(c + 1, i + 1) <= rank {
            c += 1;
        }
        rank -= binomial(c, i + 1);
        out[i] = c;
    }
    out
}

/// Advances `c` to its colex successor among `k`-subsets of `0..n`.
/// Returns `false` when `c` was the last subset.
pub fn colex_next(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for j in 0..k {
        let limit = if j + 1 < k { c[j + 1] } else { n };
        if c[j] + 1 < limit {
            c[j] += 1;
            for (i, slot) in c.iter_mut().enumerate().take(j) {
                *slot = i;
            }
            return true;
        }
    }
    false
}

/// Iterator over all `k`-subsets of `0..n` in colex order.
pub struct Colex {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Colex {
    pub fn new(n: usize, k: usize) -> Self {
        Colex { n, current: (k <= n).then(|| (0..k).collect()) }
    }

    /// Starts at the subset of the given colex rank.
    pub fn from_rank(n: usize, k: usize, rank: u128) -> Self {
        let current = (k <= n && rank < binomial(n, k)).then(|| colex_unrank(rank, k));
        Colex { n, current }
    }
}

impl Iterator for Colex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        if !colex_next(cur, self.n) {
            self.current = None;
        }
        Some(out)
    }
}

/// Draws `count` distinct sorted `k`-subsets of `0..n` (fewer if there are
/// not that many), in draw order.
pub fn sample_subsets<R: Rng + ?Sized>(n: usize, k: usize, count: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let total = binomial(n, k);
    let want = (count as u128).min(total) as usize;
    if want as u128 == total {
        return Colex::new(n, k).collect();
    }
    let mut seen = HashSet::with_capacity(want);
    let mut out = Vec::with_capacity(want);
    while out.len() < want {
        let mut s = rand::seq::index::sample(rng, n, k).into_vec();
        s.sort_unstable();
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

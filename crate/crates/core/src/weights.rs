//! Encoding weights: the counting lower bound, the matrix-matrix split into
//! `(ω_A, ω_B)`, and the weights used by the cyclic baseline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chosen weights for one plan. `omega_b` is 1 for matrix-vector plans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightPlan {
    pub n: usize,
    pub s: usize,
    pub k: usize,
    pub omega_hat: usize,
    pub omega_a: usize,
    pub omega_b: usize,
}

impl WeightPlan {
    pub fn omega(&self) -> usize {
        self.omega_a * self.omega_b
    }
}

/// Minimum homogeneous weight `⌈(n − s)(s + 1) / n⌉` for resilience to any
/// `s` of `n` workers.
///
/// Every unknown must appear on at least `s + 1` workers, so `n·ω ≥ k(s + 1)`.
pub fn min_weight(n: usize, s: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidParameters("n must be positive".into()));
    }
    if 2 * s > n {
        return Err(Error::UnsupportedRegime { s, k: n.saturating_sub(s) });
    }
    let k = n - s;
    Ok((k * (s + 1)).div_ceil(n))
}

/// Where the lower bound sits relative to `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightRegime {
    /// `k > s²`: the bound is exactly `s + 1`.
    Exact { omega_hat: usize },
    /// `s ≤ k ≤ s²`: the bound lies in `[⌈(s+1)/2⌉, s]`.
    Interval { lo: usize, hi: usize, omega_hat: usize },
}

pub fn weight_regime(k: usize, s: usize) -> Result<WeightRegime> {
    if s > k {
        return Err(Error::UnsupportedRegime { s, k });
    }
    let omega_hat = min_weight(k + s, s)?;
    if k > s * s {
        Ok(WeightRegime::Exact { omega_hat })
    } else {
        Ok(WeightRegime::Interval { lo: (s + 1).div_ceil(2), hi: s, omega_hat })
    }
}

/// Picks `(ω_A, ω_B)` with the smallest product `≥ omega_hat` subject to
/// `1 < ω_A < k_A` and `ω_A ≤ ω_B ≤ k_B`.
///
/// Among pairs with the minimal product, pairs with `ω_A | k_A` and
/// `ω_B | k_B` win; remaining ties go to the smaller `ω_A`.
pub fn split_weight_mm(k_a: usize, k_b: usize, omega_hat: usize) -> Result<(usize, usize)> {
    if k_a > k_b {
        return Err(Error::InvalidParameters(format!(
            "k_a = {k_a} > k_b = {k_b}; compute (BᵀA)ᵀ instead"
        )));
    }
    let infeasible = Error::InfeasibleSplit { k_a, k_b, target: omega_hat };
    let mut best: Option<(usize, bool, usize, usize)> = None;
    for wa in 2..k_a {
        let wb = omega_hat.div_ceil(wa).max(wa);
        if wb > k_b {
            continue;
        }
        // any larger ω_B for this ω_A only raises the product
        let key = (wa * wb, !(k_a % wa == 0 && k_b % wb == 0), wa, wb);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    best.map(|(_, _, wa, wb)| (wa, wb)).ok_or(infeasible)
}

/// Weights of the cyclic baseline, which always targets `min(s + 1, k)`.
///
/// `k_b == 1` means matrix-vector and returns `(min(s + 1, k_a), 1)`. For
/// matrix-matrix the split uses `ω_A, ω_B ≥ 2`, the smallest product meeting
/// the target, and the larger `ω_A` on ties.
pub fn baseline_weight_cyclic(k_a: usize, k_b: usize, s: usize) -> Result<(usize, usize)> {
    if k_a == 0 || k_b == 0 {
        return Err(Error::InvalidParameters("k_a and k_b must be positive".into()));
    }
    if k_b == 1 {
        return Ok(((s + 1).min(k_a), 1));
    }
    let target = (s + 1).min(k_a * k_b);
    let mut best: Option<(usize, std::cmp::Reverse<usize>, usize)> = None;
    for wa in 2..=k_a {
        let wb = target.div_ceil(wa).max(2);
        if wb > k_b {
            continue;
        }
        let key = (wa * wb, std::cmp::Reverse(wa), wb);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    best.map(|(_, std::cmp::Reverse(wa), wb)| (wa, wb))
        .ok_or(Error::InfeasibleSplit { k_a, k_b, target })
}

/// Weight plan of the proposed matrix-vector scheme.
pub fn plan_mv(k_a: usize, s: usize) -> Result<WeightPlan> {
    if s > k_a {
        return Err(Error::UnsupportedRegime { s, k: k_a });
    }
    let n = k_a + s;
    let omega_hat = min_weight(n, s)?;
    Ok(WeightPlan { n, s, k: k_a, omega_hat, omega_a: omega_hat, omega_b: 1 })
}

/// Weight plan of the proposed matrix-matrix scheme.
pub fn plan_mm(k_a: usize, k_b: usize, s: usize) -> Result<WeightPlan> {
    let k = k_a * k_b;
    if s > k {
        return Err(Error::UnsupportedRegime { s, k });
    }
    let n = k + s;
    let omega_hat = min_weight(n, s)?;
    let (omega_a, omega_b) = split_weight_mm(k_a, k_b, omega_hat)?;
    Ok(WeightPlan { n, s, k, omega_hat, omega_a, omega_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lower_bound_values() {
        assert_eq!(min_weight(6, 2).unwrap(), 2);
        assert_eq!(min_weight(12, 3).unwrap(), 3);
        assert_eq!(min_weight(42, 6).unwrap(), 6);
        assert_eq!(min_weight(30, 9).unwrap(), 7);
        assert_eq!(min_weight(56, 14).unwrap(), 12);
        assert_eq!(min_weight(36, 8).unwrap(), 7);
        for n in 1..20 {
            assert_eq!(min_weight(n, 0).unwrap(), 1);
        }
    }

    #[test]
    fn lower_bound_rejects_majority_stragglers() {
        assert!(matches!(min_weight(5, 3), Err(Error::UnsupportedRegime { .. })));
        assert!(min_weight(0, 0).is_err());
        assert_eq!(min_weight(6, 3).unwrap(), 2);
    }

    #[test]
    fn regimes() {
        assert_eq!(weight_regime(10, 3).unwrap(), WeightRegime::Exact { omega_hat: 4 });
        assert_eq!(min_weight(13, 3).unwrap(), 4);
        assert_eq!(weight_regime(9, 3).unwrap(), WeightRegime::Interval { lo: 2, hi: 3, omega_hat: 3 });
        assert_eq!(weight_regime(4, 4).unwrap(), WeightRegime::Interval { lo: 3, hi: 4, omega_hat: 3 });
        assert!(weight_regime(3, 4).is_err());
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_weight_mm(6, 6, 6).unwrap(), (2, 3));
        assert_eq!(split_weight_mm(4, 4, 4).unwrap(), (2, 2));
        assert_eq!(split_weight_mm(4, 7, 7).unwrap(), (2, 4));
        assert_eq!(split_weight_mm(6, 7, 12).unwrap(), (2, 6));
        assert!(matches!(split_weight_mm(2, 5, 3), Err(Error::InfeasibleSplit { .. })));
        assert!(split_weight_mm(5, 4, 3).is_err());
    }

    #[test]
    fn split_prefers_divisor_pairs() {
        // product 12 is reachable as (2,6) and (3,4); only (3,4) divides (6, 8)
        assert_eq!(split_weight_mm(6, 8, 12).unwrap(), (3, 4));
    }

    #[test]
    fn baseline_examples() {
        assert_eq!(baseline_weight_cyclic(7, 1, 9).unwrap(), (7, 1));
        assert_eq!(baseline_weight_cyclic(21, 1, 9).unwrap(), (10, 1));
        assert_eq!(baseline_weight_cyclic(9, 1, 3).unwrap(), (4, 1));
        assert_eq!(baseline_weight_cyclic(6, 6, 6).unwrap(), (4, 2));
        assert_eq!(baseline_weight_cyclic(4, 4, 4).unwrap(), (3, 2));
        let (a, b) = baseline_weight_cyclic(6, 7, 14).unwrap();
        assert_eq!(a * b, 15);
        let (a, b) = baseline_weight_cyclic(4, 7, 8).unwrap();
        assert_eq!(a * b, 9);
    }

    /// Exhaustive reference for the split: enumerate every admissible pair.
    fn brute_split(k_a: usize, k_b: usize, target: usize) -> Option<(usize, usize)> {
        let mut pairs = Vec::new();
        for wa in 2..k_a {
            for wb in wa..=k_b {
                if wa * wb >= target {
                    pairs.push((wa * wb, !(k_a % wa == 0 && k_b % wb == 0), wa, wb));
                }
            }
        }
        pairs.into_iter().min().map(|p| (p.2, p.3))
    }

    #[test]
    fn split_matches_enumeration() {
        for k_a in 1..9 {
            for k_b in k_a..11 {
                for target in 1..=(k_a * k_b) {
                    assert_eq!(
                        split_weight_mm(k_a, k_b, target).ok(),
                        brute_split(k_a, k_b, target),
                        "k_a={k_a} k_b={k_b} target={target}"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bound_at_most_s_plus_one(k in 1usize..300, s in 0usize..300) {
            prop_assume!(s <= k);
            let w = min_weight(k + s, s).unwrap();
            prop_assert!(w <= s + 1);
            prop_assert!((k + s) * w >= k * (s + 1));
        }

        #[test]
        fn bound_monotone(k in 1usize..200, s in 0usize..200) {
            prop_assume!(s < k);
            let w = min_weight(k + s, s).unwrap();
            prop_assert!(min_weight(k + 1 + s, s).unwrap() >= w);
            prop_assert!(min_weight(k + s + 1, s + 1).unwrap() >= w);
        }

        #[test]
        fn regime_consistent(k in 1usize..400, s in 0usize..40) {
            prop_assume!(s <= k);
            match weight_regime(k, s).unwrap() {
                WeightRegime::Exact { omega_hat } => prop_assert_eq!(omega_hat, s + 1),
                WeightRegime::Interval { lo, hi, omega_hat } => {
                    prop_assert!(lo <= omega_hat && omega_hat <= hi);
                }
            }
        }

        #[test]
        fn split_between_bound_and_baseline(k_a in 3usize..9, k_b in 3usize..12, s in 0usize..40) {
            prop_assume!(k_a <= k_b && s <= k_a * k_b);
            let k = k_a * k_b;
            let hat = min_weight(k + s, s).unwrap();
            if let (Ok((pa, pb)), Ok((ba, bb))) =
                (split_weight_mm(k_a, k_b, hat), baseline_weight_cyclic(k_a, k_b, s))
            {
                prop_assert!(pa * pb >= hat);
                prop_assert!(pa * pb <= ba * bb, "proposed {}x{} vs baseline {}x{}", pa, pb, ba, bb);
                prop_assert!((k + s) * pa * pb >= k * (s + 1));
            }
        }
    }
}

//! Brute-force verifiers: a dense reference product, union-size (Hall)
//! checks over worker subsets, the window-union claims behind the
//! resilience proofs, and exhaustive decodability.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decoder::{is_decodable, DECODE_TOL};
use crate::encoder::{EncodingPlan, Scheme};
use crate::error::{Error, Result};
use crate::par;
use crate::sparse::SparseMatrix;
use crate::subsets::{binomial, sample_subsets, Colex};

/// Enumerate a level exhaustively when it has at most this many subsets.
pub const LEVEL_CAP: u128 = 100_000;
/// Subsets drawn per level above [`LEVEL_CAP`].
pub const LEVEL_SAMPLES: usize = 10_000;

fn to_row_major(m: &SparseMatrix) -> Vec<f64> {
    let mut d = vec![0.0; m.rows() * m.cols()];
    for (r, c, v) in m.triplets() {
        d[r * m.cols() + c] = v;
    }
    d
}

/// `Aᵀx` by an explicit double loop over a dense copy of `A`.
pub fn dense_reference_mv(a: &SparseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!("A has {} rows, x has length {}", a.rows(), x.len())));
    }
    let (r, t) = (a.rows(), a.cols());
    let da = to_row_major(a);
    let mut out = vec![0.0; t];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..r {
            acc += da[i * t + j] * x[i];
        }
        *o = acc;
    }
    Ok(out)
}

/// `AᵀB` by an explicit triple loop over dense copies.
pub fn dense_reference_mm(a: &SparseMatrix, b: &SparseMatrix) -> Result<DMatrix<f64>> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!("A has {} rows, B has {}", a.rows(), b.rows())));
    }
    let (r, t, w) = (a.rows(), a.cols(), b.cols());
    let (da, db) = (to_row_major(a), to_row_major(b));
    let mut out = vec![0.0; t * w];
    for i in 0..t {
        for j in 0..w {
            let mut acc = 0.0;
            for l in 0..r {
                acc += da[l * t + i] * db[l * w + j];
            }
            out[i * w + j] = acc;
        }
    }
    Ok(DMatrix::from_row_slice(t, w, &out))
}

/// `‖got − want‖ / ‖want‖` (absolute error when `want` is zero).
pub fn relative_error(got: &[f64], want: &[f64]) -> f64 {
    let diff: f64 = got.iter().zip(want).map(|(g, w)| (g - w) * (g - w)).sum::<f64>().sqrt();
    let norm: f64 = want.iter().map(|w| w * w).sum::<f64>().sqrt();
    if got.len() != want.len() {
        f64::INFINITY
    } else if norm == 0.0 {
        diff
    } else {
        diff / norm
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnionReport {
    pub subset: Vec<usize>,
    pub union: Vec<usize>,
    pub bound: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LevelMode {
    Exhaustive,
    Sampled { samples: usize },
}

/// Outcome of one subset size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub m: usize,
    pub mode: LevelMode,
    pub checked: u64,
    pub min_union: usize,
    pub bound: usize,
    /// The first violation found, in colex or draw order.
    pub violation: Option<UnionReport>,
}

impl LevelReport {
    pub fn pass(&self) -> bool {
        self.violation.is_none()
    }
}

/// Bitset over unknown ids.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }

    fn of(ids: &[usize], len: usize) -> Self {
        let mut b = Bits::new(len);
        for &i in ids {
            b.0[i / 64] |= 1 << (i % 64);
        }
        b
    }

    fn union_count(sets: &[Bits], members: &[usize], scratch: &mut Bits) -> usize {
        scratch.0.iter_mut().for_each(|w| *w = 0);
        for &m in members {
            for (s, w) in scratch.0.iter_mut().zip(&sets[m].0) {
                *s |= w;
            }
        }
        scratch.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn ids(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, w) in self.0.iter().enumerate() {
            for b in 0..64 {
                if w >> b & 1 == 1 {
                    out.push(wi * 64 + b);
                }
            }
        }
        out
    }
}

/// Checks every `m`-subset of `families` (exhaustive or sampled) against
/// `bound(m)`, where a subset's value is the size of the union of its sets.
fn check_unions(
    families: &[Vec<usize>],
    universe: usize,
    m: usize,
    bound: usize,
    seed: u64,
) -> LevelReport {
    let sets: Vec<Bits> = families.iter().map(|f| Bits::of(f, universe)).collect();
    let n = families.len();
    let total = binomial(n, m);
    let eval = |subset: &[usize], scratch: &mut Bits| Bits::union_count(&sets, subset, scratch);
    let report = |subset: Vec<usize>, size: usize| {
        let mut scratch = Bits::new(universe);
        Bits::union_count(&sets, &subset, &mut scratch);
        UnionReport { subset, union: scratch.ids(), bound, pass: size >= bound }
    };

    let (mode, checked, min_union, violation) = if total <= LEVEL_CAP {
        let total = total as u64;
        let chunks = total.clamp(1, 128);
        let per = total.div_ceil(chunks);
        let parts = par::map_indexed(chunks as usize, |c| {
            let start = c as u64 * per;
            let len = per.min(total.saturating_sub(start)) as usize;
            let mut scratch = Bits::new(universe);
            let mut min = usize::MAX;
            let mut first_bad = None;
            for subset in Colex::from_rank(n, m, start as u128).take(len) {
                let u = eval(&subset, &mut scratch);
                min = min.min(u);
                if u < bound && first_bad.is_none() {
                    first_bad = Some((subset, u));
                }
            }
            (min, first_bad)
        });
        let min = parts.iter().map(|p| p.0).min().unwrap_or(usize::MAX);
        let bad = parts.into_iter().find_map(|p| p.1);
        (LevelMode::Exhaustive, total, min, bad)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let drawn = sample_subsets(n, m, LEVEL_SAMPLES, &mut rng);
        let mut scratch = Bits::new(universe);
        let mut min = usize::MAX;
        let mut bad = None;
        for subset in drawn.iter() {
            let u = eval(subset, &mut scratch);
            min = min.min(u);
            if u < bound && bad.is_none() {
                bad = Some((subset.clone(), u));
            }
        }
        (LevelMode::Sampled { samples: drawn.len() }, drawn.len() as u64, min, bad)
    };
    LevelReport {
        m,
        mode,
        checked,
        min_union,
        bound,
        violation: violation.map(|(s, u)| report(s, u)),
    }
}

/// Hall condition: every `m` workers (`m ≤ max_m ≤ k`) touch at least `m`
/// distinct unknowns. Levels with more than [`LEVEL_CAP`] subsets are sampled.
pub fn hall_check(plan: &EncodingPlan, max_m: usize, seed: u64) -> Result<Vec<LevelReport>> {
    let k = plan.k();
    if max_m > k || max_m > plan.n {
        return Err(Error::InvalidParameters(format!("max_m = {max_m} exceeds k = {k} or n = {}", plan.n)));
    }
    let families: Vec<Vec<usize>> = (0..plan.n).map(|i| plan.unknowns_of(i)).collect();
    Ok((1..=max_m).map(|m| check_unions(&families, k, m, m, seed)).collect())
}

/// One named claim evaluated at one subset size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub level: LevelReport,
    /// Set when the claim is an equality: the exact value the minimum must hit.
    pub exact: Option<usize>,
}

impl ClaimCheck {
    pub fn pass(&self) -> bool {
        self.level.pass() && self.exact.is_none_or(|e| self.level.min_union == e)
    }
}

fn check(claim: &str, families: &[Vec<usize>], universe: usize, m: usize, bound: usize, exact: bool, seed: u64) -> ClaimCheck {
    ClaimCheck {
        claim: claim.to_string(),
        level: check_unions(families, universe, m, bound, seed),
        exact: exact.then_some(bound),
    }
}

fn cyclic_window(start: usize, w: usize, k: usize) -> Vec<usize> {
    (start..start + w).map(|x| x % k).collect()
}

/// Window-union claims for proposed plans.
///
/// Matrix-vector plans: any `m_0` workers among the first `k` touch at least
/// `min(m_0 + ω − 1, k)` blocks, and any `m_1 ≥ ω` of the last `s` touch all
/// `k`. Matrix-matrix plans: any `q ≤ k_A − ω_A + 1` distinct cyclic A windows
/// cover at least `ω_A + q − 1` blocks (likewise for B), and within a class
/// `M_q = {W_q, W_{q+k_A}, …}` the fewest unknowns over `δ` members is exactly
/// `ω_A · min(ω_B + δ − 1, k_B)`.
pub fn claim_bounds_check(plan: &EncodingPlan, seed: u64) -> Result<Vec<ClaimCheck>> {
    let mut out = Vec::new();
    match plan.scheme {
        Scheme::ProposedMv => {
            let (k, w) = (plan.k_a, plan.weights.omega_a);
            let w0: Vec<Vec<usize>> = plan.supports_a[..k].to_vec();
            let w1: Vec<Vec<usize>> = plan.supports_a[k..].to_vec();
            for m0 in 1..=k {
                out.push(check("cyclic-union", &w0, k, m0, (m0 + w - 1).min(k), false, seed));
            }
            for m1 in w..=w1.len() {
                out.push(check("block-saturation", &w1, k, m1, k, true, seed));
            }
        }
        Scheme::ProposedMm => {
            let (ka, kb) = (plan.k_a, plan.k_b);
            let (wa, wb) = (plan.weights.omega_a, plan.weights.omega_b);
            let da: Vec<Vec<usize>> = (0..ka).map(|i| cyclic_window(i, wa, ka)).collect();
            for q in 1..=(ka - wa + 1) {
                out.push(check("a-window-union", &da, ka, q, wa + q - 1, false, seed));
            }
            let db: Vec<Vec<usize>> = (0..kb).map(|i| cyclic_window(i, wb, kb)).collect();
            for q in 1..=(kb - wb + 1) {
                out.push(check("b-window-union", &db, kb, q, wb + q - 1, false, seed));
            }
            let k = ka * kb;
            for class in 0..ka {
                let members: Vec<Vec<usize>> =
                    (class..k).step_by(ka).map(|i| plan.unknowns_of(i)).collect();
                for delta in 1..=members.len() {
                    let rho = wa * (wb + delta - 1).min(kb);
                    out.push(check(&format!("class-{class}-count"), &members, k, delta, rho, true, seed));
                }
            }
        }
        _ => {
            return Err(Error::InvalidParameters(format!(
                "window claims apply to proposed plans, not `{}`",
                plan.scheme.tag()
            )))
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodabilityReport {
    pub subsets: u64,
    pub failures: u64,
    pub first_failure: Option<Vec<usize>>,
}

/// Runs the decodability test on every `k`-subset of workers.
pub fn exhaustive_decodability(plan: &EncodingPlan, cap: u128) -> Result<DecodabilityReport> {
    let (n, k) = (plan.n, plan.k());
    let total = binomial(n, k);
    if total > cap {
        return Err(Error::CapExceeded { count: total, cap });
    }
    let total = total as u64;
    let chunks = total.clamp(1, 256);
    let per = total.div_ceil(chunks);
    let parts = par::map_indexed(chunks as usize, |c| {
        let start = c as u64 * per;
        let len = per.min(total.saturating_sub(start)) as usize;
        let mut fails = 0u64;
        let mut first = None;
        for subset in Colex::from_rank(n, k, start as u128).take(len) {
            if !is_decodable(plan, &subset, DECODE_TOL) {
                fails += 1;
                first.get_or_insert(subset);
            }
        }
        (fails, first)
    });
    let failures = parts.iter().map(|p| p.0).sum();
    let first_failure = parts.into_iter().find_map(|p| p.1);
    Ok(DecodabilityReport { subsets: total, failures, first_failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{baseline_cyclic_plan, proposed_mm_plan, proposed_mv_plan};

    #[test]
    fn dense_reference_identity_and_zero() {
        let i = SparseMatrix::identity(4);
        let x = vec![1.0, -2.0, 3.0, 0.5];
        assert_eq!(dense_reference_mv(&i, &x).unwrap(), x);
        let z = SparseMatrix::zeros(4, 3);
        assert_eq!(dense_reference_mv(&z, &x).unwrap(), vec![0.0; 3]);
        let b = SparseMatrix::from_triplets(4, 2, &[(0, 0, 2.0), (3, 1, -1.0)]).unwrap();
        assert_eq!(dense_reference_mm(&i, &b).unwrap(), b.to_dense());
        assert!(dense_reference_mv(&i, &[1.0]).is_err());
    }

    #[test]
    fn union_of_three_workers() {
        let plan = proposed_mv_plan(6, 4, 2, 1).unwrap();
        let families: Vec<Vec<usize>> = [0, 1, 4].iter().map(|&i| plan.unknowns_of(i)).collect();
        let level = check_unions(&families, 4, 3, 3, 0);
        assert!(level.pass());
        assert_eq!(level.min_union, 3);
    }

    #[test]
    fn hall_small_plan() {
        let plan = proposed_mv_plan(6, 4, 2, 1).unwrap();
        let levels = hall_check(&plan, 4, 0).unwrap();
        assert_eq!(levels.len(), 4);
        assert!(levels.iter().all(|l| l.pass() && l.mode == LevelMode::Exhaustive));
        assert_eq!(levels[3].checked, 15);
    }

    #[test]
    fn hall_detects_violation() {
        let mut plan = proposed_mv_plan(6, 4, 2, 1).unwrap();
        for s in plan.supports_a.iter_mut().take(3) {
            *s = vec![0, 1];
        }
        let levels = hall_check(&plan, 4, 0).unwrap();
        let bad = levels.iter().find(|l| !l.pass()).unwrap();
        assert_eq!(bad.m, 3);
        assert_eq!(bad.violation.as_ref().unwrap().union, vec![0, 1]);
    }

    #[test]
    fn claims_hold_for_proposed() {
        let p = proposed_mv_plan(6, 4, 2, 1).unwrap();
        let checks = claim_bounds_check(&p, 0).unwrap();
        assert!(checks.iter().all(ClaimCheck::pass));
        let sat: Vec<_> = checks.iter().filter(|c| c.claim == "block-saturation").collect();
        assert_eq!(sat.len(), 1);
        assert_eq!(sat[0].level.min_union, 4);
        let mm = proposed_mm_plan(20, 4, 4, 4, 1).unwrap();
        let checks = claim_bounds_check(&mm, 0).unwrap();
        assert!(checks.iter().all(ClaimCheck::pass));
        let c0 = checks.iter().find(|c| c.claim == "class-0-count" && c.level.m == 2).unwrap();
        assert_eq!(c0.level.min_union, 6);
    }

    #[test]
    fn claims_reject_other_schemes() {
        let c = baseline_cyclic_plan(6, 4, 1, 2, 1).unwrap();
        assert!(claim_bounds_check(&c, 0).is_err());
    }

    #[test]
    fn decodability_counts() {
        let plan = proposed_mv_plan(6, 4, 2, 2).unwrap();
        let r = exhaustive_decodability(&plan, 1000).unwrap();
        assert_eq!((r.subsets, r.failures), (15, 0));
        let mut broken = plan.clone();
        broken.supports_a[5] = vec![0, 1];
        broken.coeffs_a[5] = broken.coeffs_a[4].clone();
        let r = exhaustive_decodability(&broken, 1000).unwrap();
        assert!(r.failures > 0);
        assert!(r.first_failure.unwrap().contains(&4));
        assert!(exhaustive_decodability(&plan, 10).is_err());
    }

    #[test]
    fn relative_error_cases() {
        assert_eq!(relative_error(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(relative_error(&[0.5], &[0.0]), 0.5);
        assert!((relative_error(&[3.0, 0.0], &[4.0, 0.0]) - 0.25).abs() < 1e-15);
    }
}

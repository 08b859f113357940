//! Encoding plans: which uncoded blocks each worker combines, with which
//! coefficients, and the sparse encoding of the blocks themselves.
//!
//! Worker `i` of a matrix-vector plan holds `Ã_i = Σ_{q∈T_i} r_{i,q} A_q` and
//! returns `Ã_iᵀ x`. In a matrix-matrix plan it also holds
//! `B̃_i = Σ_{q∈S_i} r'_{i,q} B_q` and returns `Ã_iᵀ B̃_i`, an equation in the
//! `ω_A·ω_B` unknowns `A_uᵀ B_v` with `u ∈ T_i`, `v ∈ S_i`.
//!
//! Proposed plans place the first `k` workers on cyclic windows (shift 1) and
//! the remaining `s` workers on block windows (shift `ω`), which is what lets
//! the weight drop to the counting bound while any `k` workers still decode.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::sparse::{combine_blocks, nonzero_normal, partition_columns, BlockPartition, SparseMatrix};
use crate::weights::{self, WeightPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ProposedMv,
    ProposedMm,
    Poly,
    DenseRandom,
    CyclicBaseline,
}

impl Scheme {
    pub fn tag(&self) -> &'static str {
        match self {
            Scheme::ProposedMv => "proposed-mv",
            Scheme::ProposedMm => "proposed-mm",
            Scheme::Poly => "poly",
            Scheme::DenseRandom => "dense-random",
            Scheme::CyclicBaseline => "cyclic-baseline",
        }
    }
}

/// Code family, independent of the product being computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Proposed,
    Poly,
    DenseRandom,
    Cyclic,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Proposed, Family::Poly, Family::DenseRandom, Family::Cyclic];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Proposed => "proposed",
            Family::Poly => "poly",
            Family::DenseRandom => "dense-random",
            Family::Cyclic => "cyclic",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Family::Proposed),
            "poly" => Ok(Family::Poly),
            "dense-random" | "dense" => Ok(Family::DenseRandom),
            "cyclic" | "cyclic-baseline" => Ok(Family::Cyclic),
            other => Err(Error::InvalidParameters(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Product {
    /// `Aᵀx`
    MatVec,
    /// `AᵀB`
    MatMat,
}

/// Everything needed to build a plan except the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSpec {
    pub family: Family,
    pub product: Product,
    pub k_a: usize,
    /// Ignored (treated as 1) for matrix-vector.
    pub k_b: usize,
    pub s: usize,
}

impl PlanSpec {
    pub fn mv(family: Family, k_a: usize, s: usize) -> Self {
        PlanSpec { family, product: Product::MatVec, k_a, k_b: 1, s }
    }

    pub fn mm(family: Family, k_a: usize, k_b: usize, s: usize) -> Self {
        PlanSpec { family, product: Product::MatMat, k_a, k_b, s }
    }

    pub fn k(&self) -> usize {
        match self.product {
            Product::MatVec => self.k_a,
            Product::MatMat => self.k_a * self.k_b,
        }
    }

    pub fn n(&self) -> usize {
        self.k() + self.s
    }

    pub fn build(&self, seed: u64) -> Result<EncodingPlan> {
        let n = self.n();
        match (self.family, self.product) {
            (Family::Proposed, Product::MatVec) => proposed_mv_plan(n, self.k_a, self.s, seed),
            (Family::Proposed, Product::MatMat) => proposed_mm_plan(n, self.k_a, self.k_b, self.s, seed),
            (Family::Poly, Product::MatVec) => baseline_poly_plan(n, self.k_a, 1),
            (Family::Poly, Product::MatMat) => baseline_poly_plan(n, self.k_a, self.k_b),
            (Family::DenseRandom, Product::MatVec) => baseline_dense_random_plan(n, self.k_a, 1, seed),
            (Family::DenseRandom, Product::MatMat) => baseline_dense_random_plan(n, self.k_a, self.k_b, seed),
            (Family::Cyclic, Product::MatVec) => baseline_cyclic_plan(n, self.k_a, 1, self.s, seed),
            (Family::Cyclic, Product::MatMat) => baseline_cyclic_plan(n, self.k_a, self.k_b, self.s, seed),
        }
    }
}

/// Per-worker supports and coefficients of a coded scheme.
///
/// A plan is matrix-vector exactly when `supports_b` is empty; then `k_b = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingPlan {
    pub scheme: Scheme,
    pub n: usize,
    pub k_a: usize,
    pub k_b: usize,
    pub s: usize,
    pub weights: WeightPlan,
    pub supports_a: Vec<Vec<usize>>,
    #[serde(default)]
    pub supports_b: Vec<Vec<usize>>,
    pub coeffs_a: Vec<Vec<f64>>,
    #[serde(default)]
    pub coeffs_b: Vec<Vec<f64>>,
    pub seed: u64,
    /// Evaluation points of a polynomial code.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
}

impl EncodingPlan {
    pub fn is_matvec(&self) -> bool {
        self.supports_b.is_empty()
    }

    pub fn product(&self) -> Product {
        if self.is_matvec() {
            Product::MatVec
        } else {
            Product::MatMat
        }
    }

    /// Number of unknowns, which is also the recovery threshold.
    pub fn k(&self) -> usize {
        if self.is_matvec() {
            self.k_a
        } else {
            self.k_a * self.k_b
        }
    }

    /// Unknown ids and coefficients of worker `i`'s equation.
    ///
    /// Matrix-vector unknown `q` is `A_qᵀx`; matrix-matrix unknown
    /// `u·k_b + v` is `A_uᵀB_v` with coefficient `r_{i,u}·r'_{i,v}`.
    pub fn equation(&self, i: usize) -> Vec<(usize, f64)> {
        if self.is_matvec() {
            return self.supports_a[i].iter().copied().zip(self.coeffs_a[i].iter().copied()).collect();
        }
        let mut row = Vec::with_capacity(self.supports_a[i].len() * self.supports_b[i].len());
        for (&u, &ca) in self.supports_a[i].iter().zip(&self.coeffs_a[i]) {
            for (&v, &cb) in self.supports_b[i].iter().zip(&self.coeffs_b[i]) {
                row.push((u * self.k_b + v, ca * cb));
            }
        }
        row
    }

    /// Unknown ids touched by worker `i` (no coefficients).
    pub fn unknowns_of(&self, i: usize) -> Vec<usize> {
        if self.is_matvec() {
            return self.supports_a[i].clone();
        }
        let mut out = Vec::new();
        for &u in &self.supports_a[i] {
            for &v in &self.supports_b[i] {
                out.push(u * self.k_b + v);
            }
        }
        out
    }

    /// How many workers each unknown appears on.
    pub fn coverage(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k()];
        for i in 0..self.n {
            for u in self.unknowns_of(i) {
                counts[u] += 1;
            }
        }
        counts
    }

    /// Checks shapes, index ranges and coefficient sanity, e.g. after loading
    /// a plan file.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        if self.n == 0 || self.k_a == 0 || self.k_b == 0 {
            return bad("n, k_a and k_b must be positive".into());
        }
        if self.n != self.k() + self.s {
            return bad(format!("n = {} but k + s = {}", self.n, self.k() + self.s));
        }
        if self.supports_a.len() != self.n || self.coeffs_a.len() != self.n {
            return bad("A-side tables must have one row per worker".into());
        }
        let matmat = !self.supports_b.is_empty();
        if matmat && (self.supports_b.len() != self.n || self.coeffs_b.len() != self.n) {
            return bad("B-side tables must have one row per worker".into());
        }
        if !matmat && self.k_b != 1 {
            return bad("matrix-vector plans need k_b = 1".into());
        }
        for i in 0..self.n {
            check_row(&self.supports_a[i], &self.coeffs_a[i], self.k_a, i, "A")?;
            if matmat {
                check_row(&self.supports_b[i], &self.coeffs_b[i], self.k_b, i, "B")?;
            }
        }
        Ok(())
    }
}

fn check_row(support: &[usize], coeffs: &[f64], k: usize, worker: usize, side: &str) -> Result<()> {
    if support.len() != coeffs.len() {
        return Err(Error::InvalidParameters(format!(
            "worker {worker}: {side}-side support and coefficients differ in length"
        )));
    }
    let mut seen = vec![false; k];
    for &q in support {
        if q >= k {
            return Err(Error::IndexOutOfRange(format!("worker {worker}: {side}-block {q} >= {k}")));
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::InvalidParameters(format!("worker {worker}: repeated {side}-block {q}")));
        }
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameters(format!("worker {worker}: non-finite {side} coefficient")));
    }
    Ok(())
}

/// `w` consecutive indices starting at `start`, reduced modulo `k`.
fn window(start: usize, w: usize, k: usize) -> Vec<usize> {
    (start..start + w).map(|x| x % k).collect()
}

/// Matrix-vector supports: cyclic windows for `i < k_a`, block windows at
/// offset `i·ω_A` for the `s` extra workers.
pub fn mv_supports(n: usize, k_a: usize, s: usize) -> Result<Vec<Vec<usize>>> {
    if k_a == 0 || n != k_a + s {
        return Err(Error::InvalidParameters(format!("need n = k_a + s, got n={n}, k_a={k_a}, s={s}")));
    }
    if s > k_a {
        return Err(Error::UnsupportedRegime { s, k: k_a });
    }
    let w = weights::min_weight(n, s)?;
    Ok((0..n)
        .map(|i| if i < k_a { window(i, w, k_a) } else { window(i * w, w, k_a) })
        .collect())
}

/// Matrix-matrix supports `(T_i, S_i)`.
///
/// For `i < k`: `T` starts at `i mod k_a`, `S` at `⌊i / k_a⌋`. For `i ≥ k`:
/// `T` is the block window at `(i mod k_a)·ω_A`, `S` the block window at
/// `⌊i·ω_A / k_a⌋·ω_B`.
pub fn mm_supports(
    n: usize,
    k_a: usize,
    k_b: usize,
    s: usize,
    omega_a: usize,
    omega_b: usize,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let k = k_a * k_b;
    if k == 0 || n != k + s {
        return Err(Error::InvalidParameters(format!(
            "need n = k_a·k_b + s, got n={n}, k_a={k_a}, k_b={k_b}, s={s}"
        )));
    }
    if s > k {
        return Err(Error::UnsupportedRegime { s, k });
    }
    if k_a > k_b {
        return Err(Error::InvalidParameters(format!("k_a = {k_a} > k_b = {k_b}")));
    }
    if omega_a == 0 || omega_a > k_a || omega_b == 0 || omega_b > k_b {
        return Err(Error::InvalidParameters(format!(
            "weights ({omega_a}, {omega_b}) outside ({k_a}, {k_b})"
        )));
    }
    Ok((0..n)
        .map(|i| {
            if i < k {
                (window(i % k_a, omega_a, k_a), window(i / k_a, omega_b, k_b))
            } else {
                let l = i % k_a;
                let m = i * omega_a / k_a;
                (window(l * omega_a, omega_a, k_a), window(m * omega_b, omega_b, k_b))
            }
        })
        .collect())
}

/// Standard-normal coefficients for the given supports, drawn from one
/// ChaCha stream in worker order (A side, then B side, per worker).
pub fn draw_coefficients(
    supports_a: &[Vec<usize>],
    supports_b: &[Vec<usize>],
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ca = Vec::with_capacity(supports_a.len());
    let mut cb = Vec::with_capacity(supports_b.len());
    for i in 0..supports_a.len() {
        ca.push(supports_a[i].iter().map(|_| nonzero_normal(&mut rng)).collect());
        if let Some(sb) = supports_b.get(i) {
            cb.push(sb.iter().map(|_| nonzero_normal(&mut rng)).collect());
        }
    }
    (ca, cb)
}

fn lower_bound(n: usize, s: usize) -> usize {
    ((n - s) * (s + 1)).div_ceil(n)
}

pub fn proposed_mv_plan(n: usize, k_a: usize, s: usize, seed: u64) -> Result<EncodingPlan> {
    let supports_a = mv_supports(n, k_a, s)?;
    let weights = weights::plan_mv(k_a, s)?;
    let (coeffs_a, _) = draw_coefficients(&supports_a, &[], seed);
    Ok(EncodingPlan {
        scheme: Scheme::ProposedMv,
        n,
        k_a,
        k_b: 1,
        s,
        weights,
        supports_a,
        supports_b: Vec::new(),
        coeffs_a,
        coeffs_b: Vec::new(),
        seed,
        nodes: None,
    })
}

pub fn proposed_mm_plan(n: usize, k_a: usize, k_b: usize, s: usize, seed: u64) -> Result<EncodingPlan> {
    if n != k_a * k_b + s {
        return Err(Error::InvalidParameters(format!(
            "need n = k_a·k_b + s, got n={n}, k_a={k_a}, k_b={k_b}, s={s}"
        )));
    }
    let weights = weights::plan_mm(k_a, k_b, s)?;
    let (supports_a, supports_b): (Vec<_>, Vec<_>) =
        mm_supports(n, k_a, k_b, s, weights.omega_a, weights.omega_b)?.into_iter().unzip();
    let (coeffs_a, coeffs_b) = draw_coefficients(&supports_a, &supports_b, seed);
    Ok(EncodingPlan {
        scheme: Scheme::ProposedMm,
        n,
        k_a,
        k_b,
        s,
        weights,
        supports_a,
        supports_b,
        coeffs_a,
        coeffs_b,
        seed,
        nodes: None,
    })
}

fn check_baseline(n: usize, k_a: usize, k_b: usize) -> Result<usize> {
    if k_a == 0 || k_b == 0 {
        return Err(Error::InvalidParameters("k_a and k_b must be positive".into()));
    }
    let k = k_a * k_b;
    if n < k {
        return Err(Error::InvalidParameters(format!("n = {n} < k = {k}")));
    }
    Ok(k)
}

/// Polynomial code on `n` equispaced nodes in `[-1, 1]`.
///
/// Worker `i` evaluates `A(z) = Σ_j A_j z^j` and `B(z) = Σ_j B_j z^{j·k_a}` at
/// `z_i`, so any `k` workers see a Vandermonde system in the unknowns.
/// `k_b = 1` builds the matrix-vector version.
pub fn baseline_poly_plan(n: usize, k_a: usize, k_b: usize) -> Result<EncodingPlan> {
    let k = check_baseline(n, k_a, k_b)?;
    let nodes: Vec<f64> = if n == 1 {
        vec![1.0]
    } else {
        (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect()
    };
    let matmat = k_b > 1 || n == 0;
    let s = n - k;
    let supports_a = vec![(0..k_a).collect::<Vec<_>>(); n];
    let coeffs_a = nodes.iter().map(|&z| (0..k_a).map(|j| z.powi(j as i32)).collect()).collect();
    let (supports_b, coeffs_b) = if matmat {
        (
            vec![(0..k_b).collect::<Vec<_>>(); n],
            nodes.iter().map(|&z| (0..k_b).map(|j| z.powi((j * k_a) as i32)).collect()).collect(),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(EncodingPlan {
        scheme: Scheme::Poly,
        n,
        k_a,
        k_b,
        s,
        weights: WeightPlan { n, s, k, omega_hat: lower_bound(n, s), omega_a: k_a, omega_b: k_b },
        supports_a,
        supports_b,
        coeffs_a,
        coeffs_b,
        seed: 0,
        nodes: Some(nodes),
    })
}

/// Polynomial matrix-matrix code with `k_a = k_b = 1` is also a legal plan;
/// this builds it explicitly since `k_b = 1` otherwise means matrix-vector.
pub fn baseline_poly_plan_mm(n: usize, k_a: usize, k_b: usize) -> Result<EncodingPlan> {
    let mut plan = baseline_poly_plan(n, k_a, k_b)?;
    if plan.supports_b.is_empty() {
        let nodes = plan.nodes.clone().unwrap_or_default();
        plan.supports_b = vec![(0..k_b).collect(); n];
        plan.coeffs_b = nodes.iter().map(|&z| (0..k_b).map(|j| z.powi((j * k_a) as i32)).collect()).collect();
    }
    Ok(plan)
}

/// Dense random code: every worker combines all blocks with i.i.d. normal
/// coefficients (a random Khatri-Rao product code in the matrix-matrix case).
pub fn baseline_dense_random_plan(n: usize, k_a: usize, k_b: usize, seed: u64) -> Result<EncodingPlan> {
    let k = check_baseline(n, k_a, k_b)?;
    let s = n - k;
    let supports_a = vec![(0..k_a).collect::<Vec<_>>(); n];
    let supports_b = if k_b > 1 { vec![(0..k_b).collect::<Vec<_>>(); n] } else { Vec::new() };
    let (coeffs_a, coeffs_b) = draw_coefficients(&supports_a, &supports_b, seed);
    Ok(EncodingPlan {
        scheme: Scheme::DenseRandom,
        n,
        k_a,
        k_b,
        s,
        weights: WeightPlan { n, s, k, omega_hat: lower_bound(n, s), omega_a: k_a, omega_b: k_b },
        supports_a,
        supports_b,
        coeffs_a,
        coeffs_b,
        seed,
        nodes: None,
    })
}

/// Cyclic baseline with weight `min(s + 1, k)`: worker `i` takes the cyclic
/// window at offset `i mod k_a` (and, for matrix-matrix, the B window at
/// `⌊i / k_a⌋ mod k_b`).
pub fn baseline_cyclic_plan(n: usize, k_a: usize, k_b: usize, s: usize, seed: u64) -> Result<EncodingPlan> {
    let k = check_baseline(n, k_a, k_b)?;
    if n != k + s {
        return Err(Error::InvalidParameters(format!("need n = k + s, got n={n}, k={k}, s={s}")));
    }
    let (omega_a, omega_b) = weights::baseline_weight_cyclic(k_a, k_b, s)?;
    let supports_a: Vec<Vec<usize>> = (0..n).map(|i| window(i % k_a, omega_a, k_a)).collect();
    let supports_b: Vec<Vec<usize>> = if k_b > 1 {
        (0..n).map(|i| window((i / k_a) % k_b, omega_b, k_b)).collect()
    } else {
        Vec::new()
    };
    let (coeffs_a, coeffs_b) = draw_coefficients(&supports_a, &supports_b, seed);
    Ok(EncodingPlan {
        scheme: Scheme::CyclicBaseline,
        n,
        k_a,
        k_b,
        s,
        weights: WeightPlan { n, s, k, omega_hat: lower_bound(n, s), omega_a, omega_b },
        supports_a,
        supports_b,
        coeffs_a,
        coeffs_b,
        seed,
        nodes: None,
    })
}

/// One worker's coded inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedTask {
    pub worker: usize,
    pub a: SparseMatrix,
    /// Coded B block; `None` for matrix-vector, where the worker gets `x`.
    pub b: Option<SparseMatrix>,
}

/// Coded blocks `Σ coeff · block` of `m`, one per worker.
pub fn encode_blocks(
    m: &SparseMatrix,
    partition: &BlockPartition,
    supports: &[Vec<usize>],
    coeffs: &[Vec<f64>],
) -> Result<Vec<SparseMatrix>> {
    if supports.len() != coeffs.len() {
        return Err(Error::InvalidParameters("supports and coefficients differ in length".into()));
    }
    let width = partition.max_width();
    par::map_indexed(supports.len(), |i| {
        if supports[i].len() != coeffs[i].len() {
            return Err(Error::InvalidParameters(format!("worker {i}: misaligned coefficients")));
        }
        let terms: Vec<(usize, f64)> = supports[i].iter().copied().zip(coeffs[i].iter().copied()).collect();
        combine_blocks(m, partition, &terms, width)
    })
    .into_iter()
    .collect()
}

/// Partitions and encodes the inputs of a whole plan.
#[derive(Debug, Clone)]
pub struct EncodedJob {
    pub part_a: BlockPartition,
    pub part_b: Option<BlockPartition>,
    pub tasks: Vec<CodedTask>,
}

pub fn encode_job(plan: &EncodingPlan, a: &SparseMatrix, b: Option<&SparseMatrix>) -> Result<EncodedJob> {
    let part_a = partition_columns(a.cols(), plan.k_a)?;
    let coded_a = encode_blocks(a, &part_a, &plan.supports_a, &plan.coeffs_a)?;
    let (part_b, coded_b) = match (plan.is_matvec(), b) {
        (true, _) => (None, None),
        (false, Some(b)) => {
            if b.rows() != a.rows() {
                return Err(Error::DimensionMismatch(format!(
                    "A has {} rows, B has {}",
                    a.rows(),
                    b.rows()
                )));
            }
            let p = partition_columns(b.cols(), plan.k_b)?;
            let coded = encode_blocks(b, &p, &plan.supports_b, &plan.coeffs_b)?;
            (Some(p), Some(coded))
        }
        (false, None) => {
            return Err(Error::InvalidParameters("matrix-matrix plan needs a B matrix".into()));
        }
    };
    let mut coded_b = coded_b.map(|v| v.into_iter());
    let tasks = coded_a
        .into_iter()
        .enumerate()
        .map(|(worker, a)| CodedTask { worker, a, b: coded_b.as_mut().and_then(|it| it.next()) })
        .collect();
    Ok(EncodedJob { part_a, part_b, tasks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::random_sparse;

    fn sets(v: &[Vec<usize>]) -> Vec<Vec<usize>> {
        v.iter()
            .map(|w| {
                let mut w = w.clone();
                w.sort_unstable();
                w
            })
            .collect()
    }

    #[test]
    fn mv_supports_small_system() {
        let s = mv_supports(6, 4, 2).unwrap();
        assert_eq!(s, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0], vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn mv_supports_twelve_workers() {
        let s = mv_supports(12, 9, 3).unwrap();
        assert_eq!(s[0], vec![0, 1, 2]);
        assert_eq!(s[7], vec![7, 8, 0]);
        assert_eq!(s[8], vec![8, 0, 1]);
        assert_eq!(s[9], vec![0, 1, 2]);
        assert_eq!(s[10], vec![3, 4, 5]);
        assert_eq!(s[11], vec![6, 7, 8]);
    }

    #[test]
    fn mv_supports_errors() {
        assert!(matches!(mv_supports(9, 4, 5), Err(Error::UnsupportedRegime { .. })));
        assert!(mv_supports(7, 4, 2).is_err());
    }

    #[test]
    fn mm_supports_twenty_workers() {
        let s = mm_supports(20, 4, 4, 4, 2, 2).unwrap();
        assert_eq!(s[0], (vec![0, 1], vec![0, 1]));
        assert_eq!(s[7], (vec![3, 0], vec![1, 2]));
        assert_eq!(s[17], (vec![2, 3], vec![0, 1]));
        assert_eq!(s[18], (vec![0, 1], vec![2, 3]));
    }

    #[test]
    fn cyclic_shift_by_one() {
        for &(k, s) in &[(4, 2), (9, 3), (21, 9), (10, 5)] {
            let sup = mv_supports(k + s, k, s).unwrap();
            let w = sup[0].len();
            for i in 0..k {
                assert_eq!(sup[i], (i..i + w).map(|x| x % k).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn coverage_at_least_s_plus_one() {
        for &(k, s) in &[(4, 2), (9, 3), (21, 9), (17, 3), (16, 4), (6, 6), (10, 1)] {
            let plan = proposed_mv_plan(k + s, k, s, 1).unwrap();
            assert!(plan.coverage().iter().all(|&c| c >= s + 1), "k={k} s={s}");
        }
        for &(ka, kb, s) in &[(4, 4, 4), (3, 3, 3), (3, 4, 5), (4, 6, 8), (6, 6, 6)] {
            let plan = proposed_mm_plan(ka * kb + s, ka, kb, s, 1).unwrap();
            assert!(plan.coverage().iter().all(|&c| c >= s + 1), "ka={ka} kb={kb} s={s}");
        }
    }

    #[test]
    fn coefficients_seeded() {
        let sup = mv_supports(12, 9, 3).unwrap();
        let (a1, _) = draw_coefficients(&sup, &[], 5);
        let (a2, _) = draw_coefficients(&sup, &[], 5);
        let (a3, _) = draw_coefficients(&sup, &[], 6);
        assert_eq!(a1, a2);
        assert_ne!(a1, a3);
        assert!(a1.iter().flatten().all(|c| c.is_finite() && *c != 0.0));
    }

    #[test]
    fn poly_plan_structure() {
        let plan = baseline_poly_plan(5, 2, 2).unwrap();
        assert_eq!(plan.k(), 4);
        assert_eq!(plan.weights.omega(), 4);
        let z = plan.nodes.as_ref().unwrap()[3];
        let mut eq = plan.equation(3);
        eq.sort_by_key(|e| e.0);
        // unknown u·k_b + v carries z^(u + 2v)
        let expected = [(0, 1.0), (1, z * z), (2, z), (3, z * z * z)];
        for ((id, c), (eid, ec)) in eq.iter().zip(expected) {
            assert_eq!(*id, eid);
            assert!((c - ec).abs() < 1e-15);
        }
    }

    #[test]
    fn poly_single_block_is_whole_product() {
        let plan = baseline_poly_plan_mm(3, 1, 1).unwrap();
        assert!(!plan.is_matvec());
        assert_eq!(plan.k(), 1);
        for i in 0..3 {
            assert_eq!(plan.unknowns_of(i), vec![0]);
        }
    }

    #[test]
    fn dense_and_cyclic_weights() {
        let d = baseline_dense_random_plan(20, 4, 4, 3).unwrap();
        assert_eq!(d.weights.omega(), 16);
        let c = baseline_cyclic_plan(12, 9, 1, 3, 3).unwrap();
        assert_eq!(c.weights.omega_a, 4);
        assert_eq!(proposed_mv_plan(12, 9, 3, 3).unwrap().weights.omega_a, 3);
        let c = baseline_cyclic_plan(20, 4, 4, 4, 3).unwrap();
        assert_eq!((c.weights.omega_a, c.weights.omega_b), (3, 2));
        assert!(c.supports_a.iter().all(|s| s.len() == 3));
        assert!(c.supports_b.iter().all(|s| s.len() == 2));
    }

    #[test]
    fn plans_validate_and_serialize() {
        let specs = [
            PlanSpec::mv(Family::Proposed, 9, 3),
            PlanSpec::mm(Family::Proposed, 4, 4, 4),
            PlanSpec::mv(Family::Poly, 6, 2),
            PlanSpec::mm(Family::DenseRandom, 3, 4, 2),
            PlanSpec::mm(Family::Cyclic, 4, 4, 4),
        ];
        for spec in specs {
            let plan = spec.build(11).unwrap();
            plan.validate().unwrap();
            let json = serde_json::to_string(&plan).unwrap();
            let back: EncodingPlan = serde_json::from_str(&json).unwrap();
            assert_eq!(back, plan);
        }
        let mut broken = PlanSpec::mv(Family::Proposed, 4, 2).build(1).unwrap();
        broken.supports_a[2][0] = 9;
        assert!(broken.validate().is_err());
    }

    #[test]
    fn encode_preserves_sparsity() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(4);
        let a = random_sparse(80, 18, 0.05, &mut rng).unwrap();
        let plan = proposed_mv_plan(12, 9, 3, 2).unwrap();
        let job = encode_job(&plan, &a, None).unwrap();
        for task in &job.tasks {
            let support_nnz: usize =
                plan.supports_a[task.worker].iter().map(|&q| a.column_slice(2 * q, 2 * q + 2).nnz()).sum();
            assert!(task.a.nnz() <= support_nnz);
        }
        assert_eq!(sets(&plan.supports_a).len(), 12);
    }

    #[test]
    fn encode_single_support_identity() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(8);
        let a = random_sparse(30, 9, 0.2, &mut rng).unwrap();
        let p = partition_columns(9, 3).unwrap();
        let coded = encode_blocks(&a, &p, &[vec![2]], &[vec![1.0]]).unwrap();
        assert_eq!(coded[0], a.column_slice(6, 9));
        assert!(encode_blocks(&a, &p, &[vec![3]], &[vec![1.0]]).is_err());
    }
}

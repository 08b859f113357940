//! Decoding systems, decodability, linear solves and condition numbers.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::encoder::EncodingPlan;
use crate::error::{Error, Result};
use crate::sparse::{partition_columns, BlockPartition};

/// Relative singular-value threshold below which a system counts as singular.
pub const DECODE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unknown {
    /// `A_qᵀx`
    Block(usize),
    /// `A_uᵀB_v`
    Pair(usize, usize),
}

/// The `k × k` system seen by a set of `k` returning workers.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingSystem {
    pub subset: Vec<usize>,
    pub matrix: DMatrix<f64>,
    pub unknowns: Vec<Unknown>,
}

pub fn unknown_labels(plan: &EncodingPlan) -> Vec<Unknown> {
    if plan.is_matvec() {
        (0..plan.k_a).map(Unknown::Block).collect()
    } else {
        (0..plan.k_a).flat_map(|u| (0..plan.k_b).map(move |v| Unknown::Pair(u, v))).collect()
    }
}

/// Coefficient rows of arbitrary workers (any count, repeats allowed).
pub fn coefficient_matrix(plan: &EncodingPlan, workers: &[usize]) -> Result<DMatrix<f64>> {
    let k = plan.k();
    let mut m = DMatrix::zeros(workers.len(), k);
    for (r, &w) in workers.iter().enumerate() {
        if w >= plan.n {
            return Err(Error::IndexOutOfRange(format!("worker {w} >= n = {}", plan.n)));
        }
        for (col, c) in plan.equation(w) {
            m[(r, col)] += c;
        }
    }
    Ok(m)
}

fn check_subset(plan: &EncodingPlan, subset: &[usize]) -> Result<()> {
    let k = plan.k();
    if subset.len() != k {
        return Err(Error::InvalidSubset(format!("expected {k} workers, got {}", subset.len())));
    }
    let mut seen = vec![false; plan.n];
    for &w in subset {
        if w >= plan.n {
            return Err(Error::InvalidSubset(format!("worker {w} >= n = {}", plan.n)));
        }
        if std::mem::replace(&mut seen[w], true) {
            return Err(Error::InvalidSubset(format!("worker {w} listed twice")));
        }
    }
    Ok(())
}

pub fn assemble(plan: &EncodingPlan, subset: &[usize]) -> Result<DecodingSystem> {
    check_subset(plan, subset)?;
    Ok(DecodingSystem {
        subset: subset.to_vec(),
        matrix: coefficient_matrix(plan, subset)?,
        unknowns: unknown_labels(plan),
    })
}

/// `σ_max / σ_min`; infinite for singular or non-finite input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    match extreme_singular_values(m) {
        Some((hi, lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

fn extreme_singular_values(m: &DMatrix<f64>) -> Option<(f64, f64)> {
    if m.is_empty() || m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let hi = sv.iter().copied().fold(0.0, f64::max);
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Some((hi, lo))
}

/// Whether the matrix has full column rank up to `tol` (relative to `σ_max`).
pub fn full_column_rank(m: &DMatrix<f64>, tol: f64) -> bool {
    if m.nrows() < m.ncols() {
        return false;
    }
    match extreme_singular_values(m) {
        Some((hi, lo)) => hi > 0.0 && lo > tol * hi,
        None => false,
    }
}

pub fn is_decodable(plan: &EncodingPlan, subset: &[usize], tol: f64) -> bool {
    match assemble(plan, subset) {
        Ok(sys) => full_column_rank(&sys.matrix, tol),
        Err(_) => false,
    }
}

/// Solves `M X = R` for a decodable system, erroring with the subset otherwise.
fn solve(sys: &DecodingSystem, rhs: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let fail = || Error::DecodeFailure { subset: sys.subset.clone() };
    if !full_column_rank(&sys.matrix, DECODE_TOL) {
        return Err(fail());
    }
    sys.matrix.clone().lu().solve(&rhs).ok_or_else(fail)
}

/// Recovers `Aᵀx` (length `a_cols`) from the results of the workers in `subset`.
///
/// `results[r]` is worker `subset[r]`'s `Ã_iᵀx`; coded blocks are padded to the
/// widest block, so each result has that length.
pub fn decode_mv(results: &[Vec<f64>], plan: &EncodingPlan, subset: &[usize], a_cols: usize) -> Result<Vec<f64>> {
    if !plan.is_matvec() {
        return Err(Error::InvalidParameters("decode_mv needs a matrix-vector plan".into()));
    }
    let sys = assemble(plan, subset)?;
    let part = partition_columns(a_cols, plan.k_a)?;
    let width = part.max_width();
    if results.len() != subset.len() || results.iter().any(|r| r.len() != width) {
        return Err(Error::DimensionMismatch(format!(
            "need {} results of length {width}",
            subset.len()
        )));
    }
    let rhs = DMatrix::from_fn(subset.len(), width, |r, c| results[r][c]);
    let x = solve(&sys, rhs)?;
    let mut out = vec![0.0; a_cols];
    for q in 0..plan.k_a {
        for (j, col) in part.range(q).enumerate() {
            out[col] = x[(q, j)];
        }
    }
    Ok(out)
}

/// Recovers `AᵀB` (`a_cols × b_cols`) from the returned blocks `Ã_iᵀB̃_i`.
pub fn decode_mm(
    results: &[DMatrix<f64>],
    plan: &EncodingPlan,
    subset: &[usize],
    a_cols: usize,
    b_cols: usize,
) -> Result<DMatrix<f64>> {
    if plan.is_matvec() {
        return Err(Error::InvalidParameters("decode_mm needs a matrix-matrix plan".into()));
    }
    let sys = assemble(plan, subset)?;
    let pa = partition_columns(a_cols, plan.k_a)?;
    let pb = partition_columns(b_cols, plan.k_b)?;
    let (wa, wb) = (pa.max_width(), pb.max_width());
    if results.len() != subset.len() || results.iter().any(|r| r.shape() != (wa, wb)) {
        return Err(Error::DimensionMismatch(format!("need {} results of shape {wa}x{wb}", subset.len())));
    }
    // row r of the right-hand side is result r flattened column-major
    let rhs = DMatrix::from_fn(subset.len(), wa * wb, |r, c| results[r][(c % wa, c / wa)]);
    let x = solve(&sys, rhs)?;
    Ok(place_blocks(&x, plan.k_b, &pa, &pb))
}

fn place_blocks(x: &DMatrix<f64>, k_b: usize, pa: &BlockPartition, pb: &BlockPartition) -> DMatrix<f64> {
    let wa = pa.max_width();
    let mut out = DMatrix::zeros(pa.range(pa.k() - 1).end, pb.range(pb.k() - 1).end);
    for u in 0..pa.k() {
        for v in 0..pb.k() {
            let row = u * k_b + v;
            for (j, oc) in pb.range(v).enumerate() {
                for (i, or) in pa.range(u).enumerate() {
                    out[(or, oc)] = x[(row, j * wa + i)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{proposed_mm_plan, proposed_mv_plan, Family, PlanSpec};

    #[test]
    fn condition_number_basics() {
        assert!((condition_number(&DMatrix::identity(4, 4)) - 1.0).abs() < 1e-12);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 10.0]));
        assert!((condition_number(&d) - 10.0).abs() < 1e-12);
        assert!((condition_number(&(d.clone() * -3.5)) - 10.0).abs() < 1e-12);
        assert!(condition_number(&DMatrix::zeros(3, 3)).is_infinite());
        let rank1 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(condition_number(&rank1) > 1e15);
    }

    #[test]
    fn banded_pattern_small_plan() {
        let plan = proposed_mv_plan(6, 4, 2, 1).unwrap();
        let sys = assemble(&plan, &[0, 1, 2, 3]).unwrap();
        let expected = [[0, 1], [1, 2], [2, 3], [0, 3]];
        for (r, cols) in expected.iter().enumerate() {
            let nz: Vec<usize> = (0..4).filter(|&c| sys.matrix[(r, c)] != 0.0).collect();
            assert_eq!(&nz, cols);
        }
    }

    #[test]
    fn matmat_row_is_outer_product() {
        let plan = proposed_mm_plan(20, 4, 4, 4, 3).unwrap();
        let sys = assemble(&plan, &(0..16).collect::<Vec<_>>()).unwrap();
        let (ca, cb) = (&plan.coeffs_a[0], &plan.coeffs_b[0]);
        let nz: Vec<usize> = (0..16).filter(|&c| sys.matrix[(0, c)] != 0.0).collect();
        assert_eq!(nz, vec![0, 1, 4, 5]);
        assert_eq!(sys.matrix[(0, 1)], ca[0] * cb[1]);
        assert_eq!(sys.matrix[(0, 4)], ca[1] * cb[0]);
        assert_eq!(sys.unknowns[5], Unknown::Pair(1, 1));
    }

    #[test]
    fn subset_errors() {
        let plan = proposed_mv_plan(6, 4, 2, 1).unwrap();
        assert!(assemble(&plan, &[0, 1, 2]).is_err());
        assert!(assemble(&plan, &[0, 1, 2, 2]).is_err());
        assert!(assemble(&plan, &[0, 1, 2, 6]).is_err());
        assert!(!is_decodable(&plan, &[0, 1, 2], DECODE_TOL));
    }

    #[test]
    fn duplicated_row_is_singular() {
        let mut plan = proposed_mv_plan(6, 4, 2, 1).unwrap();
        plan.coeffs_a[4] = plan.coeffs_a[0].clone();
        plan.supports_a[4] = plan.supports_a[0].clone();
        assert!(!is_decodable(&plan, &[0, 2, 3, 4], DECODE_TOL));
        let results = vec![vec![0.0; 2]; 4];
        assert!(matches!(
            decode_mv(&results, &plan, &[0, 2, 3, 4], 8),
            Err(Error::DecodeFailure { subset }) if subset == vec![0, 2, 3, 4]
        ));
    }

    #[test]
    fn scalar_unscaling() {
        let plan = PlanSpec::mv(Family::Proposed, 1, 0).build(5).unwrap();
        let c = plan.coeffs_a[0][0];
        let truth = vec![1.5, -2.0, 0.25];
        let res = vec![truth.iter().map(|v| c * v).collect::<Vec<_>>()];
        let got = decode_mv(&res, &plan, &[0], 3).unwrap();
        for (g, t) in got.iter().zip(&truth) {
            assert!((g - t).abs() < 1e-14);
        }
    }
}

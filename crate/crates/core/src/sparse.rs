//! Column-compressed sparse matrices, block-column partitioning and the two
//! product kernels the coded schemes need (`Aᵀx` and `AᵀB`).
//!
//! Every kernel here is cost-accounted: the simulator charges a worker
//! `flop_estimate(nnz, rhs_cols)` for a task, which is exactly the number of
//! multiply-adds these kernels perform.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real sparse matrix in compressed sparse column form.
///
/// Row indices are strictly increasing inside each column and every stored
/// value is finite and nonzero, so `nnz()` is an exact nonzero count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            col_ptr: vec![0; cols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets in any order.
    ///
    /// Out-of-range indices, repeated coordinates, non-finite values and
    /// explicitly stored zeros are all rejected.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::IndexOutOfRange(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidMatrix(format!("non-finite value at ({r}, {c})")));
            }
            if v == 0.0 {
                return Err(Error::InvalidMatrix(format!("explicit zero stored at ({r}, {c})")));
            }
            sorted.push((r, c, v));
        }
        sorted.sort_unstable_by_key(|&(r, c, _)| (c, r));
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::InvalidMatrix(format!(
                    "duplicate entry at ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        let mut col_ptr = vec![0usize; cols + 1];
        for &(_, c, _) in &sorted {
            col_ptr[c + 1] += 1;
        }
        for c in 0..cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            col_ptr,
            row_idx: sorted.iter().map(|t| t.0).collect(),
            values: sorted.iter().map(|t| t.2).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of column `c` as `(row indices, values)`.
    pub fn column(&self, c: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    /// Iterates stored entries in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.cols).flat_map(move |c| {
            let (r, v) = self.column(c);
            r.iter().zip(v).map(move |(&r, &v)| (r, c, v))
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] = v;
        }
        d
    }

    pub fn scale(&self, alpha: f64) -> SparseMatrix {
        if alpha == 0.0 {
            return SparseMatrix::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Number of stored entries in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.rows];
        for &r in &self.row_idx {
            counts[r] += 1;
        }
        counts
    }

    /// Copies columns `start..end` into a new matrix.
    pub fn column_slice(&self, start: usize, end: usize) -> SparseMatrix {
        assert!(start <= end && end <= self.cols);
        let base = self.col_ptr[start];
        SparseMatrix {
            rows: self.rows,
            cols: end - start,
            col_ptr: self.col_ptr[start..=end].iter().map(|p| p - base).collect(),
            row_idx: self.row_idx[base..self.col_ptr[end]].to_vec(),
            values: self.values[base..self.col_ptr[end]].to_vec(),
        }
    }
}

/// Contiguous split of a column range into `k` blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub source_cols: usize,
    pub boundaries: Vec<usize>,
}

impl BlockPartition {
    pub fn k(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn range(&self, q: usize) -> std::ops::Range<usize> {
        self.boundaries[q]..self.boundaries[q + 1]
    }

    pub fn width(&self, q: usize) -> usize {
        self.boundaries[q + 1] - self.boundaries[q]
    }

    /// Width of the widest block; coded blocks are padded to this.
    pub fn max_width(&self) -> usize {
        (0..self.k()).map(|q| self.width(q)).max().unwrap_or(0)
    }
}

/// Splits `cols` columns into `k` contiguous blocks, wider blocks first.
pub fn partition_columns(cols: usize, k: usize) -> Result<BlockPartition> {
    if k == 0 || k > cols {
        return Err(Error::InvalidPartition { cols, k });
    }
    let base = cols / k;
    let extra = cols % k;
    let mut boundaries = Vec::with_capacity(k + 1);
    boundaries.push(0);
    for q in 0..k {
        let w = base + usize::from(q < extra);
        boundaries.push(boundaries[q] + w);
    }
    Ok(BlockPartition { source_cols: cols, boundaries })
}

/// Sparse linear combination `Σ coeff · block_q` of blocks of `m`.
///
/// The result has `width` columns; blocks narrower than `width` are padded
/// with zero columns on the right. Only columns of the listed blocks are read,
/// so the output nonzero pattern is the union of the input patterns (minus any
/// exact cancellations).
pub fn combine_blocks(
    m: &SparseMatrix,
    partition: &BlockPartition,
    terms: &[(usize, f64)],
    width: usize,
) -> Result<SparseMatrix> {
    if partition.source_cols != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} columns, matrix has {}",
            partition.source_cols,
            m.cols()
        )));
    }
    for &(q, _) in terms {
        if q >= partition.k() {
            return Err(Error::IndexOutOfRange(format!(
                "block {q} of a {}-block partition",
                partition.k()
            )));
        }
        if partition.width(q) > width {
            return Err(Error::DimensionMismatch(format!(
                "block {q} is wider than the coded width {width}"
            )));
        }
    }

    let mut acc = vec![0.0f64; m.rows()];
    let mut touched = vec![false; m.rows()];
    let mut pattern: Vec<usize> = Vec::new();
    let mut col_ptr = Vec::with_capacity(width + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);

    for c in 0..width {
        for &(q, coeff) in terms {
            if c >= partition.width(q) {
                continue;
            }
            let (rows, vals) = m.column(partition.boundaries[q] + c);
            for (&r, &v) in rows.iter().zip(vals) {
                if !touched[r] {
                    touched[r] = true;
                    pattern.push(r);
                }
                acc[r] += coeff * v;
            }
        }
        pattern.sort_unstable();
        for &r in &pattern {
            if acc[r] != 0.0 {
                row_idx.push(r);
                values.push(acc[r]);
            }
            acc[r] = 0.0;
            touched[r] = false;
        }
        pattern.clear();
        col_ptr.push(row_idx.len());
    }

    Ok(SparseMatrix { rows: m.rows(), cols: width, col_ptr, row_idx, values })
}

/// `mᵀ x` for a dense vector `x` of length `m.rows()`.
pub fn spmv_t(m: &SparseMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against a matrix with {} rows",
            x.len(),
            m.rows()
        )));
    }
    Ok((0..m.cols())
        .map(|c| {
            let (rows, vals) = m.column(c);
            rows.iter().zip(vals).map(|(&r, &v)| v * x[r]).sum()
        })
        .collect())
}

/// Dense `aᵀ b` of shape `a.cols() × b.cols()`.
///
/// Each column of `b` is scattered once into a dense work vector and dotted
/// against every column of `a`, costing `nnz(a) · b.cols()` multiply-adds.
pub fn spmm_t(a: &SparseMatrix, b: &SparseMatrix) -> Result<DMatrix<f64>> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "aᵀb needs equal row counts, got {} and {}",
            a.rows(),
            b.rows()
        )));
    }
    let mut out = DMatrix::zeros(a.cols(), b.cols());
    let mut work = vec![0.0f64; b.rows()];
    for j in 0..b.cols() {
        let (brows, bvals) = b.column(j);
        if brows.is_empty() {
            continue;
        }
        for (&r, &v) in brows.iter().zip(bvals) {
            work[r] = v;
        }
        for i in 0..a.cols() {
            let (arows, avals) = a.column(i);
            out[(i, j)] = arows.iter().zip(avals).map(|(&r, &v)| v * work[r]).sum();
        }
        for &r in brows {
            work[r] = 0.0;
        }
    }
    Ok(out)
}

/// Floating-point operations of a sparse product: one multiply and one add
/// per stored entry per right-hand-side column.
pub fn flop_estimate(nnz: u64, result_cols: u64) -> u64 {
    2 * nnz * result_cols
}

/// Expected nonzeros of one coded block that combines `weight` blocks of a
/// `rows × cols` matrix split into `k` blocks at i.i.d. density `density`.
///
/// Uses the small-density approximation `1 − (1 − μ)^ω ≈ ωμ`.
pub fn expected_coded_nnz(rows: usize, cols: usize, k: usize, density: f64, weight: usize) -> f64 {
    (rows as f64 * cols as f64 / k as f64) * density * weight as f64
}

/// Random sparse matrix whose entries are nonzero independently with
/// probability `density`, with standard-normal values.
pub fn random_sparse<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    density: f64,
    rng: &mut R,
) -> Result<SparseMatrix> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameters(format!("density {density} outside [0, 1]")));
    }
    let binom = Binomial::new(rows as u64, density)
        .map_err(|e| Error::InvalidParameters(format!("density {density}: {e}")))?;
    let mut col_ptr = Vec::with_capacity(cols + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);
    for _ in 0..cols {
        let count = binom.sample(rng) as usize;
        let mut picked = rand::seq::index::sample(rng, rows, count).into_vec();
        picked.sort_unstable();
        for r in picked {
            row_idx.push(r);
            values.push(nonzero_normal(rng));
        }
        col_ptr.push(row_idx.len());
    }
    Ok(SparseMatrix { rows, cols, col_ptr, row_idx, values })
}

/// Standard-normal draw, redrawn on an exact zero.
pub fn nonzero_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let v: f64 = StandardNormal.sample(rng);
        if v != 0.0 {
            return v;
        }
    }
}

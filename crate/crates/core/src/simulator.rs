//! Seeded straggler simulation.
//!
//! Every worker's coded product is computed exactly with the sparse kernels.
//! Simulated finish times scale with the counted FLOPs of each task times a
//! shifted-exponential noise factor; the master decodes from the `k` earliest
//! finishers and the result is compared against the dense reference.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::decoder::{assemble, condition_number, decode_mm, decode_mv};
use crate::encoder::{encode_job, EncodingPlan, Family, PlanSpec, Product};
use crate::error::{Error, Result};
use crate::oracle::{dense_reference_mm, dense_reference_mv, relative_error};
use crate::par;
use crate::sparse::{flop_estimate, random_sparse, spmm_t, spmv_t, SparseMatrix};

/// Shifted-exponential delays: worker `i` finishes at
/// `max(flops_i, 1) / rate · (shift + E_i)` with `E_i ~ Exp(1)`, multiplied by
/// `slowdown` for forced-slow workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    pub model: String,
    pub rate: f64,
    pub shift: f64,
    #[serde(default)]
    pub slow_workers: Vec<usize>,
    pub slowdown: f64,
}

impl Default for DelayModel {
    fn default() -> Self {
        DelayModel { model: "shifted-exponential".into(), rate: 1e6, shift: 1.0, slow_workers: Vec::new(), slowdown: 10.0 }
    }
}

impl DelayModel {
    pub fn with_slow(mut self, workers: Vec<usize>) -> Self {
        self.slow_workers = workers;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::InvalidParameters(format!("rate must be positive, got {}", self.rate)));
        }
        if !(self.shift.is_finite() && self.shift >= 0.0) {
            return Err(Error::InvalidParameters(format!("shift must be nonnegative, got {}", self.shift)));
        }
        if !(self.slowdown.is_finite() && self.slowdown > 0.0) {
            return Err(Error::InvalidParameters(format!("slowdown must be positive, got {}", self.slowdown)));
        }
        if let Some(&w) = self.slow_workers.iter().find(|&&w| w >= n) {
            return Err(Error::IndexOutOfRange(format!("slow worker {w} >= n = {n}")));
        }
        Ok(())
    }

    /// Finish times for the given per-worker FLOP counts; worker `i` draws
    /// from its own stream of the seeded generator.
    pub fn sample(&self, flops: &[u64], seed: u64) -> Vec<f64> {
        flops
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64 + 1);
                let e: f64 = rng.sample(Exp1);
                let base = f.max(1) as f64 / self.rate * (self.shift + e);
                if self.slow_workers.contains(&i) {
                    base * self.slowdown
                } else {
                    base
                }
            })
            .collect()
    }
}

/// Uncoded inputs: `A` with either a vector `x` or a matrix `B`.
#[derive(Debug, Clone)]
pub enum Inputs {
    MatVec { a: SparseMatrix, x: Vec<f64> },
    MatMat { a: SparseMatrix, b: SparseMatrix },
}

impl Inputs {
    pub fn a(&self) -> &SparseMatrix {
        match self {
            Inputs::MatVec { a, .. } | Inputs::MatMat { a, .. } => a,
        }
    }

    /// Seeded synthetic inputs: `A` is `rows × cols_a`, `B` is `rows × cols_b`,
    /// both with i.i.d. density; `x` is standard normal.
    pub fn synthetic(product: Product, rows: usize, cols_a: usize, cols_b: usize, density: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_sparse(rows, cols_a, density, &mut rng)?;
        Ok(match product {
            Product::MatVec => Inputs::MatVec { a, x: (0..rows).map(|_| rng.sample(StandardNormal)).collect() },
            Product::MatMat => Inputs::MatMat { a, b: random_sparse(rows, cols_b, density, &mut rng)? },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub scheme: String,
    pub n: usize,
    pub k_a: usize,
    pub k_b: usize,
    pub s: usize,
    pub omega_a: usize,
    pub omega_b: usize,
    pub seed: u64,
    pub coded_nnz: Vec<u64>,
    pub flops: Vec<u64>,
    pub tx_nnz: Vec<u64>,
    pub finish_times: Vec<f64>,
    /// The `k` earliest finishers, in finishing order.
    pub subset: Vec<usize>,
    /// Time at which the `k`-th result arrives.
    pub finish_time: f64,
    pub decode_ok: bool,
    pub rel_err: Option<f64>,
    pub kappa_subset: f64,
}

fn mean(v: &[u64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().map(|&x| x as f64).sum::<f64>() / v.len() as f64
    }
}

impl ExperimentResult {
    pub fn coded_nnz_mean(&self) -> f64 {
        mean(&self.coded_nnz)
    }

    pub fn flops_mean(&self) -> f64 {
        mean(&self.flops)
    }

    pub fn tx_nnz_mean(&self) -> f64 {
        mean(&self.tx_nnz)
    }

    pub fn csv_row(&self) -> CsvRow {
        CsvRow {
            scheme: self.scheme.clone(),
            n: self.n,
            k_a: self.k_a,
            k_b: self.k_b,
            s: self.s,
            omega_a: self.omega_a,
            omega_b: self.omega_b,
            coded_nnz_mean: self.coded_nnz_mean(),
            flops_mean: self.flops_mean(),
            tx_nnz_mean: self.tx_nnz_mean(),
            finish_time: self.finish_time,
            decode_ok: self.decode_ok,
            rel_err: self.rel_err,
            kappa_subset: self.kappa_subset,
            seed: self.seed,
        }
    }
}

/// One CSV line; field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scheme: String,
    pub n: usize,
    pub k_a: usize,
    pub k_b: usize,
    pub s: usize,
    pub omega_a: usize,
    pub omega_b: usize,
    pub coded_nnz_mean: f64,
    pub flops_mean: f64,
    pub tx_nnz_mean: f64,
    pub finish_time: f64,
    pub decode_ok: bool,
    pub rel_err: Option<f64>,
    pub kappa_subset: f64,
    pub seed: u64,
}

#[cfg(feature = "cli")]
pub fn write_csv<W: std::io::Write>(rows: &[ExperimentResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r.csv_row()).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

enum WorkerOutput {
    Vector(Vec<f64>),
    Matrix(DMatrix<f64>),
}

/// Nonzeros the master sends each worker: the coded A block plus either the
/// coded B block or the whole of `x` (counted dense).
pub fn communication_cost(plan: &EncodingPlan, inputs: &Inputs) -> Result<Vec<u64>> {
    let job = match inputs {
        Inputs::MatVec { a, .. } => encode_job(plan, a, None)?,
        Inputs::MatMat { a, b } => encode_job(plan, a, Some(b))?,
    };
    Ok(job
        .tasks
        .iter()
        .map(|t| {
            let extra = match (&t.b, inputs) {
                (Some(b), _) => b.nnz(),
                (None, Inputs::MatVec { x, .. }) => x.len(),
                (None, Inputs::MatMat { .. }) => 0,
            };
            (t.a.nnz() + extra) as u64
        })
        .collect())
}

pub fn simulate_run(plan: &EncodingPlan, inputs: &Inputs, delay: &DelayModel, seed: u64) -> Result<ExperimentResult> {
    delay.validate(plan.n)?;
    let a = inputs.a();
    let (job, x) = match (inputs, plan.is_matvec()) {
        (Inputs::MatVec { a, x }, true) => {
            if x.len() != a.rows() {
                return Err(Error::DimensionMismatch(format!("x has length {}, A has {} rows", x.len(), a.rows())));
            }
            (encode_job(plan, a, None)?, Some(x))
        }
        (Inputs::MatMat { a, b }, false) => (encode_job(plan, a, Some(b))?, None),
        _ => return Err(Error::InvalidParameters("plan and inputs disagree on the product type".into())),
    };

    let outputs: Vec<Result<(WorkerOutput, u64, u64, u64)>> = par::map_indexed(job.tasks.len(), |i| {
        let t = &job.tasks[i];
        let a_nnz = t.a.nnz() as u64;
        match (&t.b, x) {
            (None, Some(x)) => {
                let y = spmv_t(&t.a, x)?;
                Ok((WorkerOutput::Vector(y), a_nnz, flop_estimate(a_nnz, 1), a_nnz + x.len() as u64))
            }
            (Some(b), _) => {
                let y = spmm_t(&t.a, b)?;
                let b_nnz = b.nnz() as u64;
                let flops = flop_estimate(a_nnz, b.cols() as u64);
                Ok((WorkerOutput::Matrix(y), a_nnz + b_nnz, flops, a_nnz + b_nnz))
            }
            (None, None) => Err(Error::InvalidParameters("missing right-hand side".into())),
        }
    });
    let mut results = Vec::with_capacity(outputs.len());
    let (mut coded_nnz, mut flops, mut tx_nnz) = (Vec::new(), Vec::new(), Vec::new());
    for o in outputs {
        let (r, c, f, t) = o?;
        results.push(r);
        coded_nnz.push(c);
        flops.push(f);
        tx_nnz.push(t);
    }

    let finish_times = delay.sample(&flops, seed);
    let mut order: Vec<usize> = (0..plan.n).collect();
    order.sort_by(|&i, &j| finish_times[i].total_cmp(&finish_times[j]).then(i.cmp(&j)));
    let k = plan.k();
    let subset: Vec<usize> = order[..k].to_vec();
    let finish_time = finish_times[subset[k - 1]];
    let kappa_subset = condition_number(&assemble(plan, &subset)?.matrix);

    let decoded = match inputs {
        Inputs::MatVec { x, .. } => {
            let picked: Vec<Vec<f64>> = subset
                .iter()
                .map(|&w| match &results[w] {
                    WorkerOutput::Vector(v) => v.clone(),
                    WorkerOutput::Matrix(_) => unreachable!(),
                })
                .collect();
            decode_mv(&picked, plan, &subset, a.cols())
                .and_then(|got| Ok(relative_error(&got, &dense_reference_mv(a, x)?)))
        }
        Inputs::MatMat { b, .. } => {
            let picked: Vec<DMatrix<f64>> = subset
                .iter()
                .map(|&w| match &results[w] {
                    WorkerOutput::Matrix(m) => m.clone(),
                    WorkerOutput::Vector(_) => unreachable!(),
                })
                .collect();
            decode_mm(&picked, plan, &subset, a.cols(), b.cols()).and_then(|got| {
                let want = dense_reference_mm(a, b)?;
                Ok(relative_error(got.as_slice(), want.as_slice()))
            })
        }
    };
    let (decode_ok, rel_err) = match decoded {
        Ok(e) => (true, Some(e)),
        Err(Error::DecodeFailure { .. }) => (false, None),
        Err(e) => return Err(e),
    };

    Ok(ExperimentResult {
        scheme: plan.scheme.tag().to_string(),
        n: plan.n,
        k_a: plan.k_a,
        k_b: plan.k_b,
        s: plan.s,
        omega_a: plan.weights.omega_a,
        omega_b: plan.weights.omega_b,
        seed,
        coded_nnz,
        flops,
        tx_nnz,
        finish_times,
        subset,
        finish_time,
        decode_ok,
        rel_err,
        kappa_subset,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub product: Product,
    pub k_a: usize,
    pub k_b: usize,
    pub s: usize,
    pub density: f64,
    pub rows: usize,
    pub cols_a: usize,
    /// Ignored for matrix-vector.
    pub cols_b: usize,
    pub families: Vec<Family>,
    pub seeds: Vec<u64>,
    pub delay: DelayModel,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CompareOutput {
    pub rows: Vec<ExperimentResult>,
    /// One notice per scheme that could not be built at this configuration.
    pub skipped: Vec<String>,
}

fn compare_with<F>(cfg: &CompareConfig, mut inputs_for: F) -> Result<CompareOutput>
where
    F: FnMut(u64) -> Result<Inputs>,
{
    let spec_for = |family| match cfg.product {
        Product::MatVec => PlanSpec::mv(family, cfg.k_a, cfg.s),
        Product::MatMat => PlanSpec::mm(family, cfg.k_a, cfg.k_b, cfg.s),
    };
    let mut out = CompareOutput::default();
    let mut feasible = Vec::new();
    for &family in &cfg.families {
        match spec_for(family).build(0) {
            Ok(_) => feasible.push(family),
            Err(e) => out.skipped.push(format!("{}: {e}", family.name())),
        }
    }
    for &seed in &cfg.seeds {
        let inputs = inputs_for(seed)?;
        for &family in &feasible {
            let plan = spec_for(family).build(seed)?;
            out.rows.push(simulate_run(&plan, &inputs, &cfg.delay, seed)?);
        }
    }
    Ok(out)
}

/// Runs every feasible scheme on the same seeded synthetic inputs. For each
/// seed the data, coefficient and delay seeds all equal that seed.
pub fn compare_schemes(cfg: &CompareConfig) -> Result<CompareOutput> {
    compare_with(cfg, |seed| Inputs::synthetic(cfg.product, cfg.rows, cfg.cols_a, cfg.cols_b, cfg.density, seed))
}

/// Like [`compare_schemes`] but with the same given inputs for every seed.
pub fn compare_on_inputs(cfg: &CompareConfig, inputs: &Inputs) -> Result<CompareOutput> {
    compare_with(cfg, |_| Ok(inputs.clone()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: String,
    pub runs: usize,
    pub omega_a: usize,
    pub omega_b: usize,
    pub coded_nnz_mean: f64,
    pub flops_mean: f64,
    pub tx_nnz_mean: f64,
    pub decode_rate: f64,
    /// Mean FLOPs relative to the dense-random scheme, when it was run.
    pub flop_ratio_vs_dense: Option<f64>,
}

/// Per-scheme averages over all runs, in first-appearance order.
pub fn summarize(rows: &[ExperimentResult]) -> Vec<SchemeSummary> {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.scheme.as_str()) {
            names.push(&r.scheme);
        }
    }
    let avg = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len().max(1) as f64;
    let mut out: Vec<SchemeSummary> = names
        .iter()
        .map(|name| {
            let rs: Vec<&ExperimentResult> = rows.iter().filter(|r| r.scheme == *name).collect();
            SchemeSummary {
                scheme: name.to_string(),
                runs: rs.len(),
                omega_a: rs[0].omega_a,
                omega_b: rs[0].omega_b,
                coded_nnz_mean: avg(&rs.iter().map(|r| r.coded_nnz_mean()).collect::<Vec<_>>()),
                flops_mean: avg(&rs.iter().map(|r| r.flops_mean()).collect::<Vec<_>>()),
                tx_nnz_mean: avg(&rs.iter().map(|r| r.tx_nnz_mean()).collect::<Vec<_>>()),
                decode_rate: rs.iter().filter(|r| r.decode_ok).count() as f64 / rs.len() as f64,
                flop_ratio_vs_dense: None,
            }
        })
        .collect();
    if let Some(dense) = out.iter().find(|s| s.scheme == "dense-random").map(|s| s.flops_mean) {
        for s in &mut out {
            s.flop_ratio_vs_dense = Some(s.flops_mean / dense);
        }
    }
    out
}

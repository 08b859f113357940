//! Sparsity-preserving, straggler-optimal coded distributed matrix
//! computation.
//!
//! A master splits `A` (and `B`) column-wise into `k_A` (and `k_B`) blocks,
//! hands each of `n` workers a sparse linear combination of a few blocks, and
//! recovers `AᵀB` (or `Aᵀx`) from the first `k = k_A·k_B` workers to finish.
//! The encoding weight matches the lower bound for tolerating any `s = n − k`
//! stragglers, so coded blocks stay close to the sparsity of the inputs.

pub mod decoder;
pub mod encoder;
pub mod error;
pub mod hetero;
pub mod mtx;
pub mod oracle;
pub mod simulator;
pub mod sparse;
pub mod stability;
pub mod subsets;
pub mod weights;

#[cfg(feature = "cli")]
pub mod cli;

pub use encoder::{EncodingPlan, Family, PlanSpec, Product, Scheme};
pub use error::{Error, Result};
pub use sparse::SparseMatrix;
pub use weights::{min_weight, split_weight_mm, WeightPlan};

pub(crate) mod par {
    #[cfg(feature = "parallel")]
    pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }

    #[cfg(not(feature = "parallel"))]
    pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

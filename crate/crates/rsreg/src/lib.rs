//! Robust sparse linear regression for data corrupted by two adversaries: an
//! oblivious noise vector with only a small fraction of moderate entries, and
//! an adaptive adversary that replaces a fraction of the sample rows.
//!
//! The estimator pipeline is: rescale by the noise scale, entrywise design
//! truncation, iterative covariate filtering driven by convex moment
//! relaxations with elastic (sparsity-surrogate) constraints, and weighted
//! ℓ1-penalized Huber minimization. The crate also ships synthetic
//! two-adversary instance generators, brute-force verification oracles, and a
//! sweep/benchmark harness with a CLI.

pub mod bench;
pub mod datagen;
pub mod error;
pub mod filter;
pub mod huber;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod preprocess;
pub mod relaxation;
pub mod scalar;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::{SampleScalar, Scalar};

/// Default scalar type used by the CLI and benchmark harness.
pub type S = f64;

pub type Instance = model::RegressionInstance<S>;
pub type Config = model::EstimatorConfig<S>;
pub type Weights = weights::WeightVector<S>;
pub type Estimate = pipeline::EstimateResult<S>;

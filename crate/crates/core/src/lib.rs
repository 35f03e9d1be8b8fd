//! A laboratory for the planted number partitioning problem.
//!
//! Given numbers `X_1..X_n`, a partition is a sign vector sigma in
//! {-1,+1}^n and its objective is `H(sigma) = |<sigma, X>| / sqrt(n)`.
//! The planted model conditions Gaussian numbers on a hidden partition
//! sigma* having `H(sigma*) <= C^-n`. This crate provides:
//!
//! - exact fixed-point arithmetic so energies of order `2^-n` survive
//!   cancellation ([`fixed`], [`wide`]);
//! - reproducible samplers for unplanted, planted, correlated and
//!   interpolated instances, with the planting constraint satisfied
//!   exactly ([`sampler`]);
//! - exhaustive landscape scans over all partitions via a Gray code:
//!   ground states, distance-resolved minima, level sets, overlap
//!   histograms and forbidden-tuple searches ([`scan`]);
//! - polynomial-time baselines (largest differencing, greedy, random
//!   search) and success/stability/anti-concentration probes for
//!   arbitrary algorithms ([`heuristics`]);
//! - closed-form predictors and identity oracles used as comparison
//!   targets for the Monte Carlo experiments ([`analytics`]).

pub mod analytics;
pub mod energy;
pub mod fixed;
pub mod heuristics;
pub mod instance;
pub mod partition;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod scan;
pub mod wide;

pub use energy::{BoundMultiplier, Energy, Threshold};
pub use fixed::{FixedReal, DEFAULT_FRAC_BITS};
pub use instance::{Instance, Planting};
pub use partition::{OverlapValue, Partition};
pub use wide::I256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("partition must be non-empty")]
    EmptyPartition,
    #[error("instance must be non-empty")]
    EmptyInstance,
    #[error("sign entries must be +1 or -1, got {0}")]
    BadSign(i8),
    #[error("partition characters must be '+' or '-', got {0:?}")]
    BadPartitionChar(char),
    #[error("fixed point error: {0}")]
    Fixed(#[from] crate::fixed::FixedError),
    #[error("instance is not planted")]
    NotPlanted,
    #[error("bad threshold exponent {0}")]
    BadThreshold(f64),
    #[error("planting base must be a finite real > 2, got {0}")]
    BadBase(f64),
    #[error("threshold numerator exceeds 256-bit range")]
    ThresholdOverflow,
    #[error("bad instance header: {0:?}")]
    BadHeader(String),
    #[error("bad numerator line")]
    BadNumerator,
    #[error("planted metadata inconsistent with the instance data")]
    PlantingInconsistent,
    #[error("truncated instance file")]
    Truncated,
    #[error("io error: {0}")]
    Io(String),
    #[error("n = {n} exceeds the exhaustive-scan budget (max {max})")]
    ScanTooLarge { n: usize, max: usize },
    #[error("ball enumeration budget exceeded: {nodes} nodes > {budget}")]
    BallBudget { nodes: u128, budget: u128 },
    #[error("ball radius d must satisfy 1 <= d <= n, got {0}")]
    BadRadius(usize),
    #[error("level set must have at least 2 members")]
    LevelSetTooSmall,
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

//! Exact oracles and estimators: closed-form DoF bounds, discrete leakage
//! entropies, slope regression and Monte Carlo error rates.

mod bounds;
mod entropy;
mod montecarlo;
mod slope;

pub use bounds::{dof_bounds, pairwise_bound_rate, DofBounds};
pub use entropy::{
    entropy_from_counts, leakage_joint_entropy_exact, leakage_joint_entropy_exact_with,
    leakage_marginal_entropy, row_entropy, sum_uniform_counts,
};
pub use montecarlo::{monte_carlo_pe, wilson_interval, Experiment, PeEstimate};
pub use slope::{dof_slope, half_log_power};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("channel vectors are parallel; the pairwise bound needs two independent directions")]
    DegenerateInput,
    #[error("vectors must both have length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("power must be finite and non-negative, got {0}")]
    InvalidPower(f64),
    #[error("slope fit needs at least 3 points spanning 2 decades of P: {0}")]
    InsufficientSpan(String),
    #[error("enumeration of {count} items exceeds the cap of {cap}")]
    SizeOverflow { count: u128, cap: u64 },
}

//! Batch experiments: configuration, bound tables, power sweeps, single
//! simulations and the invariant verification registry.

mod config;
mod run;
mod verify;

pub use config::{BoundsGrid, ChannelSpec, ExperimentConfig, GridRange, Overrides, SchemeKind};
pub use run::{
    analytic_limit, bounds_table, run_bounds, run_scheme, run_sweep, simulate, Simulation, SweepResult,
    BOUNDS_HEADER,
};
pub use verify::{
    constructed_maps, dmin_profile, random_alphas, registry, run_verify, suites, CheckResult, DminProfile,
    Invariant, VerifyReport, MODULE_INVARIANTS,
};

use thiserror::Error;

use crate::schemes::SchemeError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{scheme} failed at P={power}: {source}")]
    Scheme {
        scheme: &'static str,
        power: f64,
        #[source]
        source: SchemeError,
    },
}

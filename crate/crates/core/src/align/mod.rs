//! Real interference alignment machinery.
//!
//! Monomials in the channel gains are identified by their integer exponent
//! tuples, never by their floating-point values. Structure maps, collision
//! detection and rational-independence certificates are all exact integer
//! computations; floating point only enters when monomials are evaluated for
//! transmission.

mod constellation;
mod monomial;
mod pam;
mod precoder;

pub use constellation::{
    check_rational_independence, decode_nearest, enumerate_receiver_constellation,
    enumerate_receiver_constellation_with, min_distance,
    AlphaSpec, Independence, NearestPointDecoder, ReceiverConstellation,
};
pub use monomial::{build_monomial_set, build_monomial_set_with, MonomialExponent, MonomialRole, MonomialSet};
pub use pam::{select_pam_params, select_pam_params_split, PamCode};
pub use precoder::{
    build_precoder, effective_channels, effective_channels_with, AlignmentPrecoder, EffectiveChannels, Group, StructureMap,
};

use thiserror::Error;

/// Default limit on the number of objects any enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error("enumeration of {count} items exceeds the cap of {cap}")]
    SizeOverflow { count: u128, cap: u64 },
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    InvalidEpsilon(f64),
    #[error("power must exceed 1, got {0}")]
    InvalidPower(f64),
    #[error("normalization constant must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("{0} must be at least 1")]
    ZeroParameter(&'static str),
    #[error("base gains are empty")]
    NoBases,
    #[error("a precoder needs a generator set, not a product set")]
    NotGenerator,
    #[error("precoder was not built over the gains of the {0} group")]
    BaseMismatch(&'static str),
    #[error("{duplicates} constellation points coincide; the symbol vector is not identifiable")]
    AmbiguousConstellation { duplicates: usize },
    #[error("structure map is malformed: {0}")]
    MalformedStructureMap(String),
}

/// Returns `base^exp` if it fits under `cap`.
pub(crate) fn checked_count(base: u64, exp: usize, cap: u64) -> Result<u64, AlignError> {
    let count = (base as u128)
        .checked_pow(exp as u32)
        .unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(AlignError::SizeOverflow { count, cap });
    }
    Ok(count as u64)
}

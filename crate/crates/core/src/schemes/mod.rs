//! Transmission schemes, each an encoder plus a rate and leakage accountant.
//!
//! Rates are in bits per channel use. `dof_contribution` is the analytic
//! high-power limit of `rate / (1/2 log2 P)`; [`SchemeReport::rate_ratio`]
//! gives the same ratio at the simulated power.

mod ia;
mod linear;
mod multilevel;
mod timeshare;

pub use ia::{
    ia_wiretap_limit, ia_wiretap_scheme, pb_double_ia, pb_double_limit, pb_one_sided_ia, pb_one_sided_limit,
};
pub use linear::{artificial_noise_rate, pb_zero_force, zf_eavesdroppers_rate};
pub use multilevel::{
    f3_decode_y1, f3_decode_y2, f3_encode, f3_equivocation, multilevel_decode, multilevel_dof,
    multilevel_encode, multilevel_equivocation, multilevel_scheme, select_guard_level, MultilevelCode,
    MultilevelReceiver,
};
pub use timeshare::{
    binomial, for_each_subset, timeshare_dof, timeshare_eavesdropper_plan, timeshare_multicast_plan,
    ErasureCode, MulticastPlan, FIELD_PRIME,
};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::align::{AlignError, DEFAULT_ENUMERATION_CAP};
use crate::analysis::{half_log_power, AnalysisError, PeEstimate};
use crate::channel::ChannelError;
use crate::seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("precondition failed for {scheme}: {reason}")]
    PreconditionFailed { scheme: &'static str, reason: String },
    #[error("{count} subsets exceed the cap of {cap}")]
    CombinatorialOverflow { count: u128, cap: u64 },
    #[error("decoding failed: {0}")]
    DecodeFailure(String),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

pub(crate) fn precondition(scheme: &'static str, reason: impl Into<String>) -> SchemeError {
    SchemeError::PreconditionFailed {
        scheme,
        reason: reason.into(),
    }
}

/// Knobs shared by all schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOptions {
    /// Root of every random stream a scheme draws from.
    pub seed: u64,
    /// Monte Carlo trials; zero skips error-rate estimation.
    pub trials: u64,
    /// Limit on any enumeration (monomials, constellations, subsets).
    pub cap: u64,
    /// Random unit directions tried when a beam only has to avoid zeros.
    pub directions: usize,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 0,
            cap: DEFAULT_ENUMERATION_CAP,
            directions: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeReport {
    pub scheme: String,
    pub m: usize,
    pub j1: usize,
    pub j2: usize,
    pub power: f64,
    pub n: Option<u32>,
    pub eps: Option<f64>,
    /// Secrecy rate, or sum secrecy rate for the private broadcast schemes.
    pub rate_bits: f64,
    /// Per-message rates of the private broadcast schemes.
    pub message_rates: Vec<f64>,
    pub leakage_bits: f64,
    /// Looser closed-form leakage bound, where the scheme has one.
    pub leakage_bound_bits: Option<f64>,
    pub pe: Option<PeEstimate>,
    pub dof_contribution: f64,
    pub warnings: Vec<String>,
}

pub const CSV_HEADER: [&str; 12] = [
    "scheme",
    "M",
    "J1",
    "J2",
    "P",
    "N",
    "eps",
    "rate_bits",
    "leakage_bits",
    "pe",
    "trials",
    "dof",
];

impl SchemeReport {
    pub(crate) fn new(scheme: &str, m: usize, j1: usize, j2: usize, power: f64) -> Self {
        Self {
            scheme: scheme.to_string(),
            m,
            j1,
            j2,
            power,
            n: None,
            eps: None,
            rate_bits: 0.0,
            message_rates: Vec::new(),
            leakage_bits: 0.0,
            leakage_bound_bits: None,
            pe: None,
            dof_contribution: 0.0,
            warnings: Vec::new(),
        }
    }

    /// `rate / (1/2 log2 P)` at the simulated power.
    pub fn rate_ratio(&self) -> f64 {
        self.rate_bits / half_log_power(self.power)
    }

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            self.scheme.clone(),
            self.m.to_string(),
            self.j1.to_string(),
            self.j2.to_string(),
            self.power.to_string(),
            opt(self.n.map(|n| n.to_string())),
            opt(self.eps.map(|e| e.to_string())),
            self.rate_bits.to_string(),
            self.leakage_bits.to_string(),
            opt(self.pe.map(|p| p.pe.to_string())),
            self.pe.map_or(0, |p| p.trials).to_string(),
            self.dof_contribution.to_string(),
        ]
    }
}

pub(crate) fn half_log1p(x: f64) -> f64 {
    0.5 * x.ln_1p() / std::f64::consts::LN_2
}

/// Unit vector in the row span of `basis` maximizing `min_i |targets_i . t|`.
///
/// Candidates are the normalized projections of every target onto the span
/// and `directions` random unit vectors drawn from the span.
pub(crate) fn best_direction(
    basis: &DMatrix<f64>,
    targets: &[&[f64]],
    directions: usize,
    seed: u64,
    path: &str,
) -> Vec<f64> {
    let (r, m) = basis.shape();
    let score = |t: &[f64]| {
        targets
            .iter()
            .map(|h| h.iter().zip(t).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(f64::INFINITY, f64::min)
    };
    let from_coeffs = |c: &[f64]| -> Option<Vec<f64>> {
        let mut t = vec![0.0; m];
        for (k, ck) in c.iter().enumerate() {
            for (i, ti) in t.iter_mut().enumerate() {
                *ti += ck * basis[(k, i)];
            }
        }
        let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        (norm > 1e-12).then(|| t.into_iter().map(|x| x / norm).collect())
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |t: Vec<f64>| {
        let s = score(&t);
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, t));
        }
    };
    for h in targets {
        let coeffs: Vec<f64> = (0..r)
            .map(|k| (0..m).map(|i| basis[(k, i)] * h[i]).sum())
            .collect();
        if let Some(t) = from_coeffs(&coeffs) {
            consider(t);
        }
    }
    let mut rng = seed::stream(seed, path);
    for _ in 0..directions {
        let coeffs: Vec<f64> = (0..r).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(t) = from_coeffs(&coeffs) {
            consider(t);
        }
    }
    best.map(|(_, t)| t).unwrap_or_else(|| {
        let mut t = vec![0.0; m];
        t[0] = 1.0;
        t
    })
}

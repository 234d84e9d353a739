//! The compound MISO channel.
//!
//! A transmitter with `M` antennas talks to `J1` legitimate channel states
//! `h_j` and `J2` eavesdropper states `g_k`; each receiver sees
//! `y_j = <h_j, x> + v_j` (respectively `z_k = <g_k, x> + w_k`) with i.i.d.
//! Gaussian noise. This module holds the channel description, the
//! general-position test, orthonormal null-space construction, and the noisy
//! transmit map shared by every scheme.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;

/// Relative singular-value threshold used for every rank decision.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("channel vector is empty")]
    Empty,
    #[error("channel vector is identically zero")]
    ZeroVector,
    #[error("channel vector has a non-finite entry")]
    NonFinite,
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("the {group} group is empty")]
    EmptyGroup { group: &'static str },
    #[error("power must be positive and finite, got {0}")]
    InvalidPower(f64),
    #[error("noise variance must be non-negative and finite, got {0}")]
    InvalidNoise(f64),
    #[error("input vectors already span R^{0}; the null space is trivial")]
    FullRankInput(usize),
    #[error("no input vectors were given")]
    NoVectors,
}

/// Real gains from the `M` transmit antennas to one single-antenna receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ChannelVector(Vec<f64>);

impl ChannelVector {
    pub fn new(coefficients: Vec<f64>) -> Result<Self, ChannelError> {
        if coefficients.is_empty() {
            return Err(ChannelError::Empty);
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(ChannelError::NonFinite);
        }
        if coefficients.iter().all(|&c| c == 0.0) {
            return Err(ChannelError::ZeroVector);
        }
        Ok(Self(coefficients))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.0, x)
    }

    pub fn norm(&self) -> f64 {
        self.dot(&self.0).sqrt()
    }
}

impl TryFrom<Vec<f64>> for ChannelVector {
    type Error = ChannelError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ChannelVector> for Vec<f64> {
    fn from(v: ChannelVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for ChannelVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// On-disk form of a [`CompoundChannel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(rename = "M")]
    pub m: usize,
    pub legit: Vec<ChannelVector>,
    pub eaves: Vec<ChannelVector>,
    pub power: f64,
    #[serde(default = "default_noise_var")]
    pub noise_var: f64,
}

fn default_noise_var() -> f64 {
    1.0
}

/// A compound MISO wiretap channel: `J1` legitimate states, `J2` eavesdropper
/// states, transmit power `P` and receiver noise variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelConfig", into = "ChannelConfig")]
pub struct CompoundChannel {
    m: usize,
    legit: Vec<ChannelVector>,
    eaves: Vec<ChannelVector>,
    power: f64,
    noise_var: f64,
}

impl TryFrom<ChannelConfig> for CompoundChannel {
    type Error = ChannelError;

    fn try_from(c: ChannelConfig) -> Result<Self, Self::Error> {
        CompoundChannel::new(c.m, c.legit, c.eaves, c.power, c.noise_var)
    }
}

impl From<CompoundChannel> for ChannelConfig {
    fn from(c: CompoundChannel) -> Self {
        ChannelConfig {
            m: c.m,
            legit: c.legit,
            eaves: c.eaves,
            power: c.power,
            noise_var: c.noise_var,
        }
    }
}

impl CompoundChannel {
    pub fn new(
        m: usize,
        legit: Vec<ChannelVector>,
        eaves: Vec<ChannelVector>,
        power: f64,
        noise_var: f64,
    ) -> Result<Self, ChannelError> {
        if legit.is_empty() {
            return Err(ChannelError::EmptyGroup { group: "legitimate" });
        }
        if eaves.is_empty() {
            return Err(ChannelError::EmptyGroup {
                group: "eavesdropper",
            });
        }
        if let Some(v) = legit.iter().chain(&eaves).find(|v| v.len() != m) {
            return Err(ChannelError::LengthMismatch {
                expected: m,
                got: v.len(),
            });
        }
        if !(power.is_finite() && power > 0.0) {
            return Err(ChannelError::InvalidPower(power));
        }
        if !(noise_var.is_finite() && noise_var >= 0.0) {
            return Err(ChannelError::InvalidNoise(noise_var));
        }
        Ok(Self {
            m,
            legit,
            eaves,
            power,
            noise_var,
        })
    }

    /// Convenience constructor from raw rows; unit noise variance.
    pub fn from_rows(
        legit: &[&[f64]],
        eaves: &[&[f64]],
        power: f64,
    ) -> Result<Self, ChannelError> {
        let m = legit.first().map_or(0, |r| r.len());
        let conv = |rows: &[&[f64]]| -> Result<Vec<_>, ChannelError> {
            rows.iter().map(|r| ChannelVector::new(r.to_vec())).collect()
        };
        Self::new(m, conv(legit)?, conv(eaves)?, power, 1.0)
    }

    /// The two-antenna example with `h1 = (1, 1)`, `h2 = (1, -1)`,
    /// `g1 = (1, 0)`, `g2 = (0, 1)` on which the multilevel F3 code runs.
    pub fn multilevel_example(power: f64) -> Self {
        Self::from_rows(&[&[1.0, 1.0], &[1.0, -1.0]], &[&[1.0, 0.0], &[0.0, 1.0]], power)
            .expect("static example is well formed")
    }

    pub fn antennas(&self) -> usize {
        self.m
    }

    pub fn legit(&self) -> &[ChannelVector] {
        &self.legit
    }

    pub fn eaves(&self) -> &[ChannelVector] {
        &self.eaves
    }

    pub fn j1(&self) -> usize {
        self.legit.len()
    }

    pub fn j2(&self) -> usize {
        self.eaves.len()
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn with_power(mut self, power: f64) -> Result<Self, ChannelError> {
        if !(power.is_finite() && power > 0.0) {
            return Err(ChannelError::InvalidPower(power));
        }
        self.power = power;
        Ok(self)
    }

    pub fn with_noise_var(mut self, noise_var: f64) -> Result<Self, ChannelError> {
        if !(noise_var.is_finite() && noise_var >= 0.0) {
            return Err(ChannelError::InvalidNoise(noise_var));
        }
        self.noise_var = noise_var;
        Ok(self)
    }

    /// Swaps the roles of the two groups.
    pub fn swapped(&self) -> Self {
        Self {
            m: self.m,
            legit: self.eaves.clone(),
            eaves: self.legit.clone(),
            power: self.power,
            noise_var: self.noise_var,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Draws a channel with i.i.d. standard normal gains from the `"channel"`
/// stream of `seed`. Power defaults to 1 and noise variance to 1.
pub fn sample_compound_channel(m: usize, j1: usize, j2: usize, seed: u64) -> CompoundChannel {
    assert!(m >= 1 && j1 >= 1 && j2 >= 1, "M, J1, J2 must be positive");
    let mut rng = seed::stream(seed, "channel");
    let draw = |rng: &mut seed::StreamRng| loop {
        let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(v) = ChannelVector::new(v) {
            break v;
        }
    };
    let legit = (0..j1).map(|_| draw(&mut rng)).collect();
    let eaves = (0..j2).map(|_| draw(&mut rng)).collect();
    CompoundChannel::new(m, legit, eaves, 1.0, 1.0).expect("sampled channel is well formed")
}

fn rows_matrix(vectors: &[&[f64]], m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(vectors.len(), m, |r, c| vectors[r][c])
}

/// Numerical rank of the row set, using [`RANK_TOLERANCE`] relative to the
/// largest singular value.
pub fn rank(vectors: &[&[f64]]) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let sv = rows_matrix(vectors, first.len()).singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}

/// True iff every subset of `min(M, J1 + J2)` vectors from the union of both
/// groups is linearly independent.
pub fn check_general_position(channel: &CompoundChannel) -> bool {
    let all: Vec<&[f64]> = channel
        .legit()
        .iter()
        .chain(channel.eaves())
        .map(ChannelVector::as_slice)
        .collect();
    let size = channel.antennas().min(all.len());
    all.iter()
        .copied()
        .combinations(size)
        .all(|subset| rank(&subset) == size)
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)`,
/// returned as the rows of a `(M - rank) x M` matrix.
///
/// Each basis row is sign-normalized so that its largest-magnitude entry is
/// positive, which makes the output deterministic.
pub fn null_space_basis(vectors: &[ChannelVector]) -> Result<DMatrix<f64>, ChannelError> {
    let rows: Vec<&[f64]> = vectors.iter().map(ChannelVector::as_slice).collect();
    null_space_of_rows(&rows)
}

pub(crate) fn null_space_of_rows(rows: &[&[f64]]) -> Result<DMatrix<f64>, ChannelError> {
    let m = rows.first().ok_or(ChannelError::NoVectors)?.len();
    // Pad with zero rows so the SVD returns a full M x M right factor.
    let n = rows.len().max(m);
    let a = DMatrix::from_fn(n, m, |r, c| rows.get(r).map_or(0.0, |row| row[c]));
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.max();
    let null_rows: Vec<usize> = (0..m)
        .filter(|&i| max == 0.0 || svd.singular_values[i] <= RANK_TOLERANCE * max)
        .collect();
    if null_rows.is_empty() {
        return Err(ChannelError::FullRankInput(m));
    }
    let mut basis = DMatrix::zeros(null_rows.len(), m);
    for (out, &i) in null_rows.iter().enumerate() {
        let mut row: Vec<f64> = v_t.row(i).iter().copied().collect();
        let pivot = row
            .iter()
            .copied()
            .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
        for (c, x) in row.into_iter().enumerate() {
            basis[(out, c)] = x;
        }
    }
    Ok(basis)
}

/// Outputs of every receiver for one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub legit: Vec<f64>,
    pub eaves: Vec<f64>,
}

/// Sends `x` through every channel state, adding independent
/// `N(0, noise_var)` noise drawn from the `"noise"` stream of `seed`.
pub fn transmit_receive(channel: &CompoundChannel, x: &[f64], seed: u64) -> Observation {
    let mut rng = seed::stream(seed, "noise");
    transmit_receive_with(channel, x, &mut rng)
}

/// Like [`transmit_receive`] but draws noise from a caller-owned stream.
pub fn transmit_receive_with<R: Rng + ?Sized>(
    channel: &CompoundChannel,
    x: &[f64],
    rng: &mut R,
) -> Observation {
    assert_eq!(x.len(), channel.antennas(), "input length must equal M");
    let sigma = channel.noise_var().sqrt();
    let mut noisy = |v: &ChannelVector| {
        let n: f64 = rng.sample(StandardNormal);
        v.dot(x) + sigma * n
    };
    let legit = channel.legit().iter().map(&mut noisy).collect();
    let eaves = channel.eaves().iter().map(&mut noisy).collect();
    Observation { legit, eaves }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cv(v: &[f64]) -> ChannelVector {
        ChannelVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn vector_validation() {
        assert_eq!(ChannelVector::new(vec![]), Err(ChannelError::Empty));
        assert_eq!(ChannelVector::new(vec![0.0, 0.0]), Err(ChannelError::ZeroVector));
        assert_eq!(ChannelVector::new(vec![1.0, f64::NAN]), Err(ChannelError::NonFinite));
    }

    #[test]
    fn channel_validation() {
        let err = CompoundChannel::new(2, vec![cv(&[1.0, 0.0])], vec![], 1.0, 1.0);
        assert!(matches!(err, Err(ChannelError::EmptyGroup { .. })));
        let err = CompoundChannel::new(2, vec![cv(&[1.0])], vec![cv(&[1.0, 0.0])], 1.0, 1.0);
        assert!(matches!(err, Err(ChannelError::LengthMismatch { .. })));
        let err = CompoundChannel::new(1, vec![cv(&[1.0])], vec![cv(&[1.0])], 0.0, 1.0);
        assert!(matches!(err, Err(ChannelError::InvalidPower(_))));
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_compound_channel(2, 1, 1, 99);
        let b = sample_compound_channel(2, 1, 1, 99);
        assert_eq!(a, b);
        assert_eq!(a.legit()[0].len(), 2);
        assert_ne!(a, sample_compound_channel(2, 1, 1, 100));
    }

    #[test]
    fn scalar_channels_are_in_general_position() {
        for seed in 0..20 {
            assert!(check_general_position(&sample_compound_channel(1, 1, 1, seed)));
        }
    }

    #[test]
    fn general_position_examples() {
        let ch = CompoundChannel::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]], &[&[1.0, 1.0]], 1.0).unwrap();
        assert!(check_general_position(&ch));
        let ch = CompoundChannel::from_rows(&[&[1.0, 1.0]], &[&[2.0, 2.0]], 1.0).unwrap();
        assert!(!check_general_position(&ch));
    }

    #[test]
    fn random_channels_pass_general_position() {
        let failures = (0..1000)
            .filter(|&s| !check_general_position(&sample_compound_channel(3, 3, 3, s)))
            .count();
        assert_eq!(failures, 0);
    }

    #[test]
    fn null_space_examples() {
        let b = null_space_basis(&[cv(&[1.0, 0.0])]).unwrap();
        assert_eq!(b.shape(), (1, 2));
        assert_abs_diff_eq!(b[(0, 0)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[(0, 1)].abs(), 1.0, epsilon = 1e-12);

        let b = null_space_basis(&[cv(&[1.0, 0.0, 0.0]), cv(&[0.0, 1.0, 0.0])]).unwrap();
        assert_eq!(b.shape(), (1, 3));
        assert_abs_diff_eq!(b[(0, 2)].abs(), 1.0, epsilon = 1e-12);

        let b = null_space_basis(&[cv(&[1.0, 1.0, 0.0])]).unwrap();
        assert_eq!(b.nrows(), 2);
        for r in 0..2 {
            let row: Vec<f64> = b.row(r).iter().copied().collect();
            assert!(dot(&row, &[1.0, 1.0, 0.0]).abs() <= 1e-12);
        }
    }

    #[test]
    fn null_space_of_spanning_set_is_an_error() {
        let err = null_space_basis(&[cv(&[1.0, 0.0]), cv(&[0.0, 1.0])]);
        assert_eq!(err, Err(ChannelError::FullRankInput(2)));
        // Rank-deficient but over-complete input still has a null space.
        let b = null_space_basis(&[cv(&[1.0, 1.0, 0.0]), cv(&[2.0, 2.0, 0.0]), cv(&[0.0, 0.0, 1.0])]).unwrap();
        assert_eq!(b.nrows(), 1);
    }

    #[test]
    fn transmit_receive_is_linear_without_noise() {
        let ch = CompoundChannel::from_rows(&[&[1.0, 2.0]], &[&[0.5, -1.0]], 1.0)
            .unwrap()
            .with_noise_var(0.0)
            .unwrap();
        let obs = transmit_receive(&ch, &[3.0, 1.0], 5);
        assert_eq!(obs.legit, vec![5.0]);
        assert_eq!(obs.eaves, vec![0.5]);
        let zero = transmit_receive(&ch, &[0.0, 0.0], 5);
        assert_eq!(zero.legit, vec![0.0]);
        assert_eq!(zero.eaves, vec![0.0]);
    }

    #[test]
    fn noise_has_requested_variance() {
        let ch = CompoundChannel::from_rows(&[&[1.0, 2.0]], &[&[0.5, -1.0]], 1.0).unwrap();
        let x = [0.3, -0.7];
        let mean_signal = ch.legit()[0].dot(&x);
        let mut rng = seed::stream(3, "variance-test");
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| transmit_receive_with(&ch, &x, &mut rng).legit[0] - mean_signal)
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn json_round_trip() {
        let ch = sample_compound_channel(3, 2, 4, 11).with_power(123.456).unwrap();
        let text = ch.to_json();
        assert!(text.contains("\"M\": 3"));
        let back = CompoundChannel::from_json(&text).unwrap();
        assert_eq!(back, ch);
    }

    #[test]
    fn json_rejects_malformed_channels() {
        let bad = r#"{"M": 2, "legit": [[1, 0]], "eaves": [[0, 0]], "power": 1}"#;
        assert!(CompoundChannel::from_json(bad).is_err());
        let ok = r#"{"M": 2, "legit": [[1, 0]], "eaves": [[0, 1]], "power": 4}"#;
        let ch = CompoundChannel::from_json(ok).unwrap();
        assert_eq!(ch.noise_var(), 1.0);
    }
}

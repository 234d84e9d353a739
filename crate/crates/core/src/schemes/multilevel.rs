use std::collections::HashMap;

use rand::Rng;
use statrs::function::erf::erfc;

use super::{precondition, SchemeError, SchemeOptions, SchemeReport};
use crate::analysis::{entropy_from_counts, half_log_power, monte_carlo_pe};
use crate::channel::{transmit_receive_with, CompoundChannel};
use crate::seed::{self, StreamRng};

/// Highest level for which transmitted symbols stay exact in an `f64`.
const MAX_ENCODED_LEVEL: u32 = 33;

/// Largest number of message bits whose equivocation is enumerated.
const MAX_ENUMERATED_BITS: u32 = 10;

/// Maps a bit to an F3 pair; `coin` selects between the two pairs of the
/// bit's coset.
pub fn f3_encode(bit: u8, coin: u8) -> (u8, u8) {
    match (bit & 1, coin & 1) {
        (0, 0) => (0, 0),
        (0, _) => (1, 1),
        (_, 0) => (0, 1),
        (_, _) => (1, 0),
    }
}

/// Receiver 1 sees `x1 + x2`: the bit is 1 exactly when the sum is 1.
pub fn f3_decode_y1(y1: u8) -> u8 {
    u8::from(y1 % 3 == 1)
}

/// Receiver 2 sees `x1 - x2`: the bit is 0 exactly when the difference is 0.
pub fn f3_decode_y2(y2: u8) -> u8 {
    u8::from(y2 % 3 != 0)
}

fn conditional_entropy<K: std::hash::Hash + Eq + Clone>(pairs: impl Iterator<Item = (K, K)>) -> f64 {
    let mut joint: HashMap<(K, K), u128> = HashMap::new();
    let mut marginal: HashMap<K, u128> = HashMap::new();
    for (msg, obs) in pairs {
        *marginal.entry(obs.clone()).or_default() += 1;
        *joint.entry((msg, obs)).or_default() += 1;
    }
    let counts = |m: Vec<u128>| entropy_from_counts(&m);
    counts(joint.into_values().collect()) - counts(marginal.into_values().collect())
}

/// `H(bit | x_i)` for `i = 1, 2` with uniform bit and coin.
pub fn f3_equivocation() -> [f64; 2] {
    let words: Vec<(u8, (u8, u8))> = (0..4u8).map(|i| (i >> 1, f3_encode(i >> 1, i & 1))).collect();
    [
        conditional_entropy(words.iter().map(|&(b, (x1, _))| (b, x1))),
        conditional_entropy(words.iter().map(|&(b, (_, x2))| (b, x2))),
    ]
}

/// Probability that `|v| >= x` for standard normal `v`.
fn two_sided_tail(x: f64) -> f64 {
    erfc(x / std::f64::consts::SQRT_2)
}

/// Smallest `T >= 1` such that both noise samples stay inside `3^{T-1}`
/// with probability at least `1 - eps_target`.
pub fn select_guard_level(eps_target: f64, noise_var: f64) -> Result<u32, SchemeError> {
    if !(eps_target > 0.0 && eps_target < 1.0) {
        return Err(precondition("multilevel", format!("eps_target must lie in (0, 1), got {eps_target}")));
    }
    if !(noise_var.is_finite() && noise_var >= 0.0) {
        return Err(precondition("multilevel", format!("invalid noise variance {noise_var}")));
    }
    if noise_var == 0.0 {
        return Ok(1);
    }
    let sigma = noise_var.sqrt();
    (1..=64u32)
        .find(|&t| {
            // 1 - (1 - q)^2 without cancellation
            let q = two_sided_tail(3f64.powi(t as i32 - 1) / sigma);
            q * (2.0 - q) <= eps_target
        })
        .ok_or_else(|| precondition("multilevel", "no guard level below 3^63 meets eps_target"))
}

/// Largest `M` with `3^{2M} <= P/2`, or `None` when even `M = 0` fails.
fn top_level(p: f64) -> Option<u32> {
    let x = (p / 2.0).ln() / 9f64.ln();
    if !(x.is_finite() && x >= -1e-12) {
        return None;
    }
    // Absorb rounding when P/2 is an exact power of 9.
    Some((x + 1e-12 * x.abs().max(1.0)).floor() as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultilevelCode {
    /// Lowest level carrying data; the levels below absorb the noise.
    pub t: u32,
    /// One past the highest level carrying data.
    pub mlev: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultilevelReceiver {
    /// Observes `x1 + x2 + v1`.
    Sum,
    /// Observes `x1 - x2 + v2`.
    Difference,
}

impl MultilevelCode {
    pub fn new(t: u32, mlev: u32) -> Result<Self, SchemeError> {
        if t == 0 || t >= mlev {
            return Err(precondition(
                "multilevel",
                format!("needs 1 <= T < Mlev, got T={t}, Mlev={mlev}"),
            ));
        }
        Ok(Self { t, mlev })
    }

    pub fn for_power(p: f64, eps_target: f64, noise_var: f64) -> Result<Self, SchemeError> {
        let t = select_guard_level(eps_target, noise_var)?;
        let mlev = top_level(p).ok_or_else(|| precondition("multilevel", format!("power {p} is too small")))?;
        Self::new(t, mlev)
    }

    pub fn message_bits(&self) -> usize {
        (self.mlev - self.t) as usize
    }

    fn check_encodable(&self) -> Result<(), SchemeError> {
        if self.mlev > MAX_ENCODED_LEVEL {
            return Err(precondition(
                "multilevel",
                format!("symbols above level {MAX_ENCODED_LEVEL} are not exactly representable"),
            ));
        }
        Ok(())
    }
}

/// Per-level F3 encoding lifted to integers: `x_i = sum_l x_i(l) 3^l`.
pub fn multilevel_encode(bits: &[u8], coins: &[u8], code: &MultilevelCode) -> Result<(i64, i64), SchemeError> {
    code.check_encodable()?;
    let k = code.message_bits();
    if bits.len() != k || coins.len() != k {
        return Err(precondition(
            "multilevel",
            format!("expected {k} bits and coins, got {} and {}", bits.len(), coins.len()),
        ));
    }
    let mut x = (0i64, 0i64);
    let mut weight = 3i64.pow(code.t);
    for (&b, &c) in bits.iter().zip(coins) {
        let (x1, x2) = f3_encode(b, c);
        x.0 += i64::from(x1) * weight;
        x.1 += i64::from(x2) * weight;
        weight *= 3;
    }
    Ok(x)
}

/// Removes the noise by rounding to the lattice `3^T Z`, then reads one
/// digit per level and applies the F3 decoder of the receiver.
pub fn multilevel_decode(y: f64, code: &MultilevelCode, receiver: MultilevelReceiver) -> Result<Vec<u8>, SchemeError> {
    code.check_encodable()?;
    let grid = 3f64.powi(code.t as i32);
    let guard = 3f64.powi(code.t as i32 - 1);
    let cell = (y / grid).round();
    if !((y - cell * grid).abs() < guard) {
        return Err(SchemeError::DecodeFailure(format!(
            "residual {} exceeds the guard {guard}",
            y - cell * grid
        )));
    }
    let mut n = cell as i64;
    let mut bits = Vec::with_capacity(code.message_bits());
    for _ in 0..code.message_bits() {
        let digit = match receiver {
            MultilevelReceiver::Sum => n.rem_euclid(3),
            MultilevelReceiver::Difference => match n.rem_euclid(3) {
                2 => -1,
                r => r,
            },
        };
        n = (n - digit) / 3;
        bits.push(match receiver {
            MultilevelReceiver::Sum => f3_decode_y1(digit as u8),
            MultilevelReceiver::Difference => f3_decode_y2(digit.rem_euclid(3) as u8),
        });
    }
    if n != 0 {
        return Err(SchemeError::DecodeFailure(format!("{cell} lies outside the codebook")));
    }
    Ok(bits)
}

/// `H(bits | x_i)` for both transmit symbols under uniform bits and coins,
/// by enumerating every input.
pub fn multilevel_equivocation(code: &MultilevelCode) -> Result<[f64; 2], SchemeError> {
    let k = code.message_bits() as u32;
    if k > MAX_ENUMERATED_BITS {
        return Err(precondition(
            "multilevel",
            format!("equivocation enumeration is limited to {MAX_ENUMERATED_BITS} bits, got {k}"),
        ));
    }
    let unpack = |v: u32| -> Vec<u8> { (0..k).map(|i| ((v >> i) & 1) as u8).collect() };
    let mut words = Vec::with_capacity(1 << (2 * k));
    for msg in 0..1u32 << k {
        for coin in 0..1u32 << k {
            let x = multilevel_encode(&unpack(msg), &unpack(coin), code)?;
            words.push((i64::from(msg), x));
        }
    }
    Ok([
        conditional_entropy(words.iter().map(|&(m, (x1, _))| (m, x1))),
        conditional_entropy(words.iter().map(|&(m, (_, x2))| (m, x2))),
    ])
}

/// `(Mlev - T) / (1/2 log2 P)` for the code selected at power `p`.
pub fn multilevel_dof(p: f64, eps_target: f64, noise_var: f64) -> Result<f64, SchemeError> {
    let code = MultilevelCode::for_power(p, eps_target, noise_var)?;
    Ok(code.message_bits() as f64 / half_log_power(p))
}

/// End-to-end multilevel scheme over the two-user channel with
/// `h = (1, 1), (1, -1)` and `g = (1, 0), (0, 1)`.
pub fn multilevel_scheme(
    p: f64,
    noise_var: f64,
    eps_target: f64,
    options: &SchemeOptions,
) -> Result<SchemeReport, SchemeError> {
    let code = MultilevelCode::for_power(p, eps_target, noise_var)?;
    let channel = CompoundChannel::multilevel_example(p).with_noise_var(noise_var)?;
    let mut report = SchemeReport::new("multilevel", 2, 2, 2, p);
    report.eps = Some(eps_target);
    report.rate_bits = code.message_bits() as f64;
    report.dof_contribution = 2f64.ln() / 3f64.ln();
    if options.trials > 0 {
        code.check_encodable()?;
        let trial = |rng: &mut StreamRng| multilevel_trial(&channel, &code, rng);
        report.pe = Some(monte_carlo_pe(
            &trial,
            options.trials,
            seed::derive_seed(options.seed, "multilevel"),
        ));
    }
    Ok(report)
}

fn multilevel_trial(channel: &CompoundChannel, code: &MultilevelCode, rng: &mut StreamRng) -> bool {
    let k = code.message_bits();
    let bits: Vec<u8> = (0..k).map(|_| rng.random_range(0..=1)).collect();
    let coins: Vec<u8> = (0..k).map(|_| rng.random_range(0..=1)).collect();
    let Ok((x1, x2)) = multilevel_encode(&bits, &coins, code) else {
        return true;
    };
    let obs = transmit_receive_with(channel, &[x1 as f64, x2 as f64], rng);
    [MultilevelReceiver::Sum, MultilevelReceiver::Difference]
        .into_iter()
        .zip(obs.legit)
        .any(|(rx, y)| multilevel_decode(y, code, rx).map_or(true, |b| b != bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn f3_table() {
        assert_eq!(f3_encode(0, 0), (0, 0));
        assert_eq!(f3_encode(0, 1), (1, 1));
        assert_eq!(f3_encode(1, 0), (0, 1));
        assert_eq!(f3_encode(1, 1), (1, 0));
        // bit 0 with coin 1: y1 = 2, y2 = 0
        assert_eq!(f3_decode_y1(2), 0);
        assert_eq!(f3_decode_y2(0), 0);
        // bit 1 with coin 0: y1 = 1, y2 = -1 = 2
        assert_eq!(f3_decode_y1(1), 1);
        assert_eq!(f3_decode_y2(2), 1);
        for bit in 0..2 {
            for coin in 0..2 {
                let (x1, x2) = f3_encode(bit, coin);
                assert_eq!(f3_decode_y1((x1 + x2) % 3), bit);
                assert_eq!(f3_decode_y2((3 + x1 - x2) % 3), bit);
            }
        }
        assert_eq!(f3_equivocation(), [1.0, 1.0]);
    }

    #[test]
    fn guard_level_selection() {
        assert_eq!(select_guard_level(1e-3, 1.0).unwrap(), 3);
        assert_eq!(select_guard_level(1e-2, 1.0).unwrap(), 2);
        assert_eq!(select_guard_level(0.5, 0.0).unwrap(), 1);
        assert!(select_guard_level(0.0, 1.0).is_err());
        let mut prev = 0;
        for e in [0.5, 1e-1, 1e-2, 1e-4, 1e-8, 1e-12] {
            let t = select_guard_level(e, 1.0).unwrap();
            assert!(t >= prev);
            prev = t;
        }
    }

    #[test]
    fn top_level_examples() {
        assert_eq!(top_level(2.0 * 3f64.powi(40)), Some(20));
        assert_eq!(top_level(2.0 * 3f64.powi(40) * 0.999), Some(19));
        assert_eq!(top_level(3f64.powi(20)), Some(9));
        assert_eq!(top_level(1.0), None);
    }

    #[test]
    fn noiseless_round_trip() {
        let code = MultilevelCode::new(2, 7).unwrap();
        for v in 0..32u32 {
            for c in [0u32, 7, 21, 31] {
                let bits: Vec<u8> = (0..5).map(|i| ((v >> i) & 1) as u8).collect();
                let coins: Vec<u8> = (0..5).map(|i| ((c >> i) & 1) as u8).collect();
                let (x1, x2) = multilevel_encode(&bits, &coins, &code).unwrap();
                let y1 = (x1 + x2) as f64;
                let y2 = (x1 - x2) as f64;
                assert_eq!(multilevel_decode(y1, &code, MultilevelReceiver::Sum).unwrap(), bits);
                assert_eq!(multilevel_decode(y2, &code, MultilevelReceiver::Difference).unwrap(), bits);
                // worst in-guard integer noise
                let nz = 3f64.powi(code.t as i32 - 1) - 1.0;
                for s in [-nz, nz] {
                    assert_eq!(multilevel_decode(y1 + s, &code, MultilevelReceiver::Sum).unwrap(), bits);
                    assert_eq!(multilevel_decode(y2 + s, &code, MultilevelReceiver::Difference).unwrap(), bits);
                }
            }
        }
    }

    #[test]
    fn guard_violation_is_reported() {
        let code = MultilevelCode::new(2, 5).unwrap();
        assert!(matches!(
            multilevel_decode(3.0, &code, MultilevelReceiver::Sum),
            Err(SchemeError::DecodeFailure(_))
        ));
        assert!(matches!(
            multilevel_decode(-9.0, &code, MultilevelReceiver::Sum),
            Err(SchemeError::DecodeFailure(_))
        ));
        assert!(matches!(
            multilevel_decode(9.0 * 27.0, &code, MultilevelReceiver::Difference),
            Err(SchemeError::DecodeFailure(_))
        ));
    }

    #[test]
    fn equivocation_is_message_length() {
        for k in 1..=4 {
            let code = MultilevelCode::new(3, 3 + k).unwrap();
            let [h1, h2] = multilevel_equivocation(&code).unwrap();
            assert_abs_diff_eq!(h1, f64::from(k), epsilon = 1e-12);
            assert_abs_diff_eq!(h2, f64::from(k), epsilon = 1e-12);
        }
    }

    #[test]
    fn dof_example_and_monotonicity() {
        let p = 2.0 * 3f64.powi(40);
        let d = multilevel_dof(p, 1e-3, 1.0).unwrap();
        assert_abs_diff_eq!(d, 17.0 / half_log_power(p), epsilon = 1e-12);
        let mut prev = f64::INFINITY;
        for e in [1e-1, 1e-3, 1e-6, 1e-12, 1e-25] {
            let v = multilevel_dof(p, e, 1.0).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        assert!(prev < d);
        assert!(matches!(multilevel_dof(40.0, 1e-3, 1.0), Err(SchemeError::PreconditionFailed { .. })));
    }

    #[test]
    fn monte_carlo_error_rate() {
        let opts = SchemeOptions {
            trials: 4000,
            seed: 17,
            ..SchemeOptions::default()
        };
        let r = multilevel_scheme(3f64.powi(20), 1.0, 1e-2, &opts).unwrap();
        let pe = r.pe.unwrap();
        assert!(pe.pe <= 1e-2 + (pe.ci95.1 - pe.pe), "{pe:?}");
        let quiet = multilevel_scheme(3f64.powi(20), 0.0, 1e-2, &opts).unwrap();
        assert_eq!(quiet.pe.unwrap().errors, 0);
    }
}

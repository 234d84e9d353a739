use nalgebra::DMatrix;

use super::{best_direction, half_log1p, precondition, SchemeError, SchemeOptions, SchemeReport};
use crate::channel::{dot, null_space_basis, CompoundChannel};

/// Below this squared gain a direction counts as zero-forced.
const DEGENERATE_GAIN: f64 = 1e-20;

fn row_norm_sq(b: &DMatrix<f64>, h: &[f64]) -> f64 {
    (0..b.nrows())
        .map(|k| {
            let p: f64 = (0..b.ncols()).map(|i| b[(k, i)] * h[i]).sum();
            p * p
        })
        .sum()
}

/// Zero-forces every eavesdropper: `x = B^T m` with `B G = 0` and
/// `m ~ N(0, P/M I)`, so `R = min_j 1/2 log2(1 + P/M |B h_j|^2)`.
pub fn zf_eavesdroppers_rate(channel: &CompoundChannel) -> Result<SchemeReport, SchemeError> {
    let (m, j1, j2) = (channel.antennas(), channel.j1(), channel.j2());
    if j2 >= m {
        return Err(precondition("zf", format!("needs J2 < M, got J2={j2}, M={m}")));
    }
    let b = null_space_basis(channel.eaves())?;
    let p = channel.power();
    let mut report = SchemeReport::new("zf", m, j1, j2, p);
    let mut rate = f64::INFINITY;
    for (j, h) in channel.legit().iter().enumerate() {
        let gain = row_norm_sq(&b, h.as_slice());
        if gain <= DEGENERATE_GAIN {
            report
                .warnings
                .push(format!("receiver {j} lies in the eavesdropper span; rate is zero"));
        }
        rate = rate.min(half_log1p(p / m as f64 * gain));
    }
    report.rate_bits = rate.max(0.0);
    report.dof_contribution = 1.0;
    Ok(report)
}

/// Sends the message along a beam `t` and Gaussian noise in the common null
/// space `A` of the legitimate receivers.
pub fn artificial_noise_rate(channel: &CompoundChannel, options: &SchemeOptions) -> Result<SchemeReport, SchemeError> {
    let (m, j1, j2) = (channel.antennas(), channel.j1(), channel.j2());
    if j1 >= m {
        return Err(precondition("an", format!("needs J1 < M, got J1={j1}, M={m}")));
    }
    let a = null_space_basis(channel.legit())?;
    let legit: Vec<&[f64]> = channel.legit().iter().map(|h| h.as_slice()).collect();
    let t = best_direction(&DMatrix::identity(m, m), &legit, options.directions, options.seed, "an/direction");

    let p0 = channel.power() / m as f64;
    let mut report = SchemeReport::new("an", m, j1, j2, channel.power());
    let main = legit
        .iter()
        .map(|h| half_log1p(p0 * dot(h, &t).powi(2)))
        .fold(f64::INFINITY, f64::min);
    let mut leak = 0.0_f64;
    for (k, g) in channel.eaves().iter().enumerate() {
        let masked = row_norm_sq(&a, g.as_slice());
        if masked <= DEGENERATE_GAIN {
            report
                .warnings
                .push(format!("eavesdropper {k} lies in the legitimate span; noise does not reach it"));
        }
        let sinr = p0 * g.dot(&t).powi(2) / (1.0 + p0 * masked);
        leak = leak.max(half_log1p(sinr));
    }
    report.rate_bits = (main - leak).max(0.0);
    report.leakage_bits = leak;
    report.dof_contribution = 1.0;
    Ok(report)
}

/// Private broadcast with `max(J1, J2) < M`: `x = v1 m1 + v2 m2` where `v1`
/// is invisible to every eavesdropper and `v2` to every legitimate receiver.
pub fn pb_zero_force(channel: &CompoundChannel, options: &SchemeOptions) -> Result<SchemeReport, SchemeError> {
    let (m, j1, j2) = (channel.antennas(), channel.j1(), channel.j2());
    if j1.max(j2) >= m {
        return Err(precondition(
            "pb_zf",
            format!("needs max(J1, J2) < M, got J1={j1}, J2={j2}, M={m}"),
        ));
    }
    let (v1, v2) = pb_beams(channel, options)?;
    let legit: Vec<&[f64]> = channel.legit().iter().map(|h| h.as_slice()).collect();
    let eaves: Vec<&[f64]> = channel.eaves().iter().map(|g| g.as_slice()).collect();
    let p = channel.power();
    let mut report = SchemeReport::new("pb_zf", m, j1, j2, p);
    let rate = |targets: &[&[f64]], v: &[f64]| {
        targets
            .iter()
            .map(|h| half_log1p(p / 2.0 * dot(h, v).powi(2)))
            .fold(f64::INFINITY, f64::min)
    };
    let r1 = rate(&legit, &v1);
    let r2 = rate(&eaves, &v2);
    let cross = eaves
        .iter()
        .map(|g| dot(g, &v1).abs())
        .chain(legit.iter().map(|h| dot(h, &v2).abs()))
        .fold(0.0, f64::max);
    if cross > 1e-10 {
        report.warnings.push(format!("zero-forcing residual {cross:e}"));
    }
    report.message_rates = vec![r1, r2];
    report.rate_bits = r1 + r2;
    report.dof_contribution = 2.0;
    Ok(report)
}

/// `v1` in the eavesdroppers' null space and `v2` in the legitimate
/// receivers' null space, each as visible as possible to its own group.
pub(crate) fn pb_beams(channel: &CompoundChannel, options: &SchemeOptions) -> Result<(Vec<f64>, Vec<f64>), SchemeError> {
    let legit: Vec<&[f64]> = channel.legit().iter().map(|h| h.as_slice()).collect();
    let eaves: Vec<&[f64]> = channel.eaves().iter().map(|g| g.as_slice()).collect();
    let v1 = best_direction(
        &null_space_basis(channel.eaves())?,
        &legit,
        options.directions,
        options.seed,
        "pb_zf/v1",
    );
    let v2 = best_direction(
        &null_space_basis(channel.legit())?,
        &eaves,
        options.directions,
        options.seed,
        "pb_zf/v2",
    );
    Ok((v1, v2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::dof_slope;
    use crate::channel::sample_compound_channel;
    use approx::assert_abs_diff_eq;

    fn sweep<F: Fn(f64) -> f64>(f: F) -> f64 {
        let pts: Vec<(f64, f64)> = (10..=40).step_by(2).map(|e| 2f64.powi(e)).map(|p| (p, f(p))).collect();
        dof_slope(&pts).unwrap()
    }

    #[test]
    fn zf_example() {
        let ch = CompoundChannel::from_rows(&[&[1.0, 1.0]], &[&[1.0, 0.0]], 2.0).unwrap();
        let r = zf_eavesdroppers_rate(&ch).unwrap();
        assert_abs_diff_eq!(r.rate_bits, 0.5, epsilon = 1e-12);
        assert_eq!(r.leakage_bits, 0.0);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn zf_degenerate_receiver() {
        let ch = CompoundChannel::from_rows(&[&[1.0, 0.0]], &[&[1.0, 0.0]], 100.0).unwrap();
        let r = zf_eavesdroppers_rate(&ch).unwrap();
        assert_abs_diff_eq!(r.rate_bits, 0.0, epsilon = 1e-12);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn zf_requires_few_eavesdroppers() {
        let ch = sample_compound_channel(2, 1, 2, 3);
        assert!(matches!(
            zf_eavesdroppers_rate(&ch),
            Err(SchemeError::PreconditionFailed { .. })
        ));
    }

    #[test]
    fn zf_slope_is_one() {
        let ch = sample_compound_channel(3, 2, 2, 11);
        let s = sweep(|p| zf_eavesdroppers_rate(&ch.clone().with_power(p).unwrap()).unwrap().rate_bits);
        assert_abs_diff_eq!(s, 1.0, epsilon = 0.02);
    }

    #[test]
    fn an_example() {
        let ch = CompoundChannel::from_rows(&[&[1.0, 0.0]], &[&[1.0, 1.0]], 8.0).unwrap();
        let r = artificial_noise_rate(&ch, &SchemeOptions::default()).unwrap();
        let want = 0.5 * 5f64.log2() - 0.5 * 1.8f64.log2();
        assert_abs_diff_eq!(r.rate_bits, want, epsilon = 1e-12);
    }

    #[test]
    fn an_degenerate_eavesdropper() {
        let ch = CompoundChannel::from_rows(&[&[1.0, 0.0]], &[&[2.0, 0.0]], 1e6).unwrap();
        let r = artificial_noise_rate(&ch, &SchemeOptions::default()).unwrap();
        assert_eq!(r.rate_bits, 0.0);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn an_slope_is_one() {
        let ch = sample_compound_channel(3, 2, 4, 5);
        let opts = SchemeOptions::default();
        let s = sweep(|p| {
            artificial_noise_rate(&ch.clone().with_power(p).unwrap(), &opts)
                .unwrap()
                .rate_bits
        });
        assert_abs_diff_eq!(s, 1.0, epsilon = 0.02);
    }

    #[test]
    fn pb_zf_sum_slope_is_two() {
        let ch = sample_compound_channel(3, 1, 1, 21);
        let opts = SchemeOptions::default();
        let (v1, v2) = pb_beams(&ch, &opts).unwrap();
        assert!(ch.eaves()[0].dot(&v1).abs() < 1e-12);
        assert!(ch.legit()[0].dot(&v2).abs() < 1e-12);
        assert!(ch.legit()[0].dot(&v1).abs() > 1e-3);
        assert!(ch.eaves()[0].dot(&v2).abs() > 1e-3);
        let s = sweep(|p| pb_zero_force(&ch.clone().with_power(p).unwrap(), &opts).unwrap().rate_bits);
        assert_abs_diff_eq!(s, 2.0, epsilon = 0.04);
        let r = pb_zero_force(&ch.clone().with_power(1e6).unwrap(), &opts).unwrap();
        assert_eq!(r.leakage_bits, 0.0);
        assert!(r.rate_ratio() > 1.5);
    }
}

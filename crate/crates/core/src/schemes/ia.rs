use rand::Rng;
use rand_distr::StandardNormal;

use super::{best_direction, precondition, SchemeError, SchemeOptions, SchemeReport};
use crate::align::{
    build_monomial_set_with, build_precoder, check_rational_independence, effective_channels_with,
    select_pam_params, select_pam_params_split, AlignmentPrecoder, AlphaSpec, EffectiveChannels, Group,
    Independence, MonomialRole, NearestPointDecoder, PamCode,
};
use crate::analysis::{leakage_marginal_entropy, monte_carlo_pe};
use crate::channel::{null_space_basis, CompoundChannel};
use crate::seed::{self, StreamRng};

/// High-power limit of `R / (1/2 log2 P)` for the alignment wiretap scheme:
/// `1 - 2 eps - (1 + 1/N)^{M J2} / (M (1 + eps))`.
pub fn ia_wiretap_limit(m: usize, j2: usize, n: u32, eps: f64) -> f64 {
    let growth = (1.0 + 1.0 / f64::from(n)).powi((m * j2) as i32);
    1.0 - 2.0 * eps - growth / (m as f64 * (1.0 + eps))
}

/// Sum-rate limit of the one-sided alignment scheme, where `j` is the size
/// of the group that needs alignment.
pub fn pb_one_sided_limit(m: usize, j: usize, n2: u32, eps: f64) -> f64 {
    let e = (m * j) as i32;
    let growth = (1.0 + 1.0 / f64::from(n2)).powi(e);
    let mf = m as f64;
    (1.0 - eps) * (2.0 * mf - 1.0 - growth) / ((mf - 1.0) + growth + eps / f64::from(n2).powi(e))
}

/// Sum-rate limit of the two-sided alignment scheme with `J = max(J1, J2)`.
pub fn pb_double_limit(m: usize, j: usize, n: u32, eps: f64) -> f64 {
    let e = (m * j) as i32;
    let growth = (1.0 + 1.0 / f64::from(n)).powi(e);
    let mf = m as f64;
    2.0 * (1.0 - eps) * (mf - growth) / (mf + growth + eps / f64::from(n).powi(e))
}

fn log2_levels(q: u32) -> f64 {
    (2.0 * f64::from(q) + 1.0).log2()
}

fn worst_leakage(eff: &EffectiveChannels, q: u32) -> f64 {
    eff.maps
        .iter()
        .map(|s| leakage_marginal_entropy(s, q))
        .fold(0.0, f64::max)
}

fn aligned_precoder(
    channel: &CompoundChannel,
    group: Group,
    n: u32,
    offset: u32,
    cap: u64,
) -> Result<(AlignmentPrecoder, EffectiveChannels), SchemeError> {
    let set = build_monomial_set_with(group.gains(channel), n, MonomialRole::Generator, offset, cap)?;
    let precoder = build_precoder(&set, channel.antennas())?;
    let eff = effective_channels_with(&precoder, channel, group, cap)?;
    Ok((precoder, eff))
}

/// Alignment wiretap scheme: `x = a V b` with `V` built over the
/// eavesdropper gains, so each eavesdropper sees only sums of at most `M`
/// symbols while every legitimate receiver sees all `M L` symbols on
/// rationally independent coefficients.
pub fn ia_wiretap_scheme(
    channel: &CompoundChannel,
    n: u32,
    eps: f64,
    options: &SchemeOptions,
) -> Result<SchemeReport, SchemeError> {
    let (m, j1, j2) = (channel.antennas(), channel.j1(), channel.j2());
    if j1.min(j2) < m {
        return Err(precondition(
            "ia",
            format!("needs min(J1, J2) >= M, got J1={j1}, J2={j2}, M={m}"),
        ));
    }
    let (precoder, eff) = aligned_precoder(channel, Group::Eavesdroppers, n, 0, options.cap)?;
    let l = precoder.l();
    let dims = m * l;
    let gamma = 1.0 / (m as f64 * precoder.monomials().sum_of_squares()).sqrt();
    let pam = select_pam_params(channel.power(), dims, eps, gamma)?;

    let mut report = SchemeReport::new("ia", m, j1, j2, channel.power());
    report.n = Some(n);
    report.eps = Some(eps);
    let leak = worst_leakage(&eff, pam.q);
    report.rate_bits = (dims as f64 * log2_levels(pam.q) - leak).max(0.0);
    report.leakage_bits = leak;
    report.leakage_bound_bits =
        Some(eff.product_set.len() as f64 * (2.0 * m as f64 * f64::from(pam.q) + 1.0).log2());
    report.dof_contribution = ia_wiretap_limit(m, j2, n, eps).max(0.0);

    if check_rational_independence(&AlphaSpec::Monomials(precoder.direct_exponents())) != Independence::Independent {
        report
            .warnings
            .push("legitimate coefficients share a monomial".to_string());
    }
    if options.trials > 0 {
        match ia_error_rate(channel, &eff, &pam, options) {
            Ok(pe) => report.pe = Some(pe),
            Err(e) => report.warnings.push(format!("error rate not estimated: {e}")),
        }
    }
    Ok(report)
}

fn ia_error_rate(
    channel: &CompoundChannel,
    eff: &EffectiveChannels,
    pam: &PamCode,
    options: &SchemeOptions,
) -> Result<crate::analysis::PeEstimate, SchemeError> {
    let decoders = eff
        .direct
        .iter()
        .map(|h| NearestPointDecoder::with_cap(h, pam, options.cap))
        .collect::<Result<Vec<_>, _>>()?;
    let sigma = channel.noise_var().sqrt();
    let q = i64::from(pam.q);
    let trial = |rng: &mut StreamRng| {
        let b: Vec<i64> = (0..pam.dims).map(|_| rng.random_range(-q..=q)).collect();
        decoders.iter().zip(&eff.direct).any(|(dec, h)| {
            let clean: f64 = h.iter().zip(&b).map(|(hi, &bi)| hi * bi as f64).sum::<f64>() * pam.a;
            let noise: f64 = rng.sample(StandardNormal);
            dec.decode_index(clean + sigma * noise) != dec.encode(&b)
        })
    };
    Ok(monte_carlo_pe(&trial, options.trials, seed::derive_seed(options.seed, "ia")))
}

/// Private broadcast when exactly one group has at least `M` receivers. The
/// large group's message rides on a beam the small group cannot see, and the
/// small group's message is aligned at every receiver of the large group.
pub fn pb_one_sided_ia(
    channel: &CompoundChannel,
    n2: u32,
    eps: f64,
    options: &SchemeOptions,
) -> Result<SchemeReport, SchemeError> {
    let (m, j1, j2) = (channel.antennas(), channel.j1(), channel.j2());
    let (lo, hi) = (j1.min(j2), j1.max(j2));
    if !(lo < m && m <= hi) {
        return Err(precondition(
            "pb_one_sided",
            format!("needs min(J1, J2) < M <= max(J1, J2), got J1={j1}, J2={j2}, M={m}"),
        ));
    }
    // Work in the orientation where the legitimate group is the large one.
    let swapped = j1 < m;
    let ch = if swapped { channel.swapped() } else { channel.clone() };

    let legit: Vec<&[f64]> = ch.legit().iter().map(|h| h.as_slice()).collect();
    let v1 = best_direction(
        &null_space_basis(ch.eaves())?,
        &legit,
        options.directions,
        options.seed,
        "pb_one_sided/v1",
    );
    let (precoder, eff) = aligned_precoder(&ch, Group::Legitimate, n2, 0, options.cap)?;
    let l2 = precoder.l();
    let l2p = eff.product_set.len();
    let mut rng = seed::stream(options.seed, "pb_one_sided/alpha");
    let alpha: Vec<f64> = (0..(m - 1) * l2).map(|_| rng.sample(StandardNormal)).collect();
    let alpha_sq: f64 = alpha.iter().map(|a| a * a).sum();
    let gamma = 1.0 / (precoder.monomials().sum_of_squares() + alpha_sq).sqrt();
    let p = ch.power();
    let pam = select_pam_params_split(p / 2.0, p / (2.0 * m as f64), (m - 1) * l2 + l2p, eps, gamma)?;

    let levels = log2_levels(pam.q);
    let r_zf = (m - 1) as f64 * l2 as f64 * levels;
    let leak = worst_leakage(&eff, pam.q);
    let r_aligned = (m as f64 * l2 as f64 * levels - leak).max(0.0);

    let mut report = SchemeReport::new("pb_one_sided", m, j1, j2, channel.power());
    report.n = Some(n2);
    report.eps = Some(eps);
    report.message_rates = if swapped {
        vec![r_aligned, r_zf]
    } else {
        vec![r_zf, r_aligned]
    };
    report.rate_bits = r_zf + r_aligned;
    report.leakage_bits = leak;
    report.leakage_bound_bits = Some(l2p as f64 * (2.0 * m as f64 * f64::from(pam.q) + 1.0).log2());
    report.dof_contribution = pb_one_sided_limit(m, hi, n2, eps).max(0.0);
    let residual = ch.eaves().iter().map(|g| g.dot(&v1).abs()).fold(0.0, f64::max);
    if residual > 1e-10 {
        report.warnings.push(format!("zero-forcing residual {residual:e}"));
    }
    Ok(report)
}

/// Private broadcast when both groups have at least `M` receivers:
/// `x = V1 b1 + V2 b2`, with `V1` aligned at the eavesdroppers and `V2` at
/// the legitimate receivers.
pub fn pb_double_ia(
    channel: &CompoundChannel,
    n: u32,
    eps: f64,
    options: &SchemeOptions,
) -> Result<SchemeReport, SchemeError> {
    let (m, j1, j2) = (channel.antennas(), channel.j1(), channel.j2());
    if j1.min(j2) < m {
        return Err(precondition(
            "pb_double",
            format!("needs min(J1, J2) >= M, got J1={j1}, J2={j2}, M={m}"),
        ));
    }
    let (v1, eff1) = aligned_precoder(channel, Group::Eavesdroppers, n, 1, options.cap)?;
    let (v2, eff2) = aligned_precoder(channel, Group::Legitimate, n, 1, options.cap)?;
    let (l1, l1p) = (v1.l(), eff1.product_set.len());
    let (l2, l2p) = (v2.l(), eff2.product_set.len());
    let dims = (m * l1 + l2p).max(m * l2 + l1p);
    let gamma = 1.0 / (v1.monomials().sum_of_squares() + v2.monomials().sum_of_squares()).sqrt();
    let p = channel.power();
    let pam = select_pam_params_split(p / 2.0, p / (2.0 * m as f64), dims, eps, gamma)?;

    let levels = log2_levels(pam.q);
    let leak1 = worst_leakage(&eff1, pam.q);
    let leak2 = worst_leakage(&eff2, pam.q);
    let r1 = (m as f64 * l1 as f64 * levels - leak1).max(0.0);
    let r2 = (m as f64 * l2 as f64 * levels - leak2).max(0.0);

    let mut report = SchemeReport::new("pb_double", m, j1, j2, p);
    report.n = Some(n);
    report.eps = Some(eps);
    report.message_rates = vec![r1, r2];
    report.rate_bits = r1 + r2;
    report.leakage_bits = leak1 + leak2;
    let row_bound = (2.0 * m as f64 * f64::from(pam.q) + 1.0).log2();
    report.leakage_bound_bits = Some((l1p + l2p) as f64 * row_bound);
    report.dof_contribution = pb_double_limit(m, j1.max(j2), n, eps).max(0.0);
    Ok(report)
}

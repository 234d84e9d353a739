use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::{BoundsGrid, ChannelSpec, ExperimentConfig, SchemeKind};
use super::run::{run_bounds, run_scheme, run_sweep};
use super::ExperimentError;
use crate::align::{
    build_monomial_set_with, build_precoder, effective_channels_with, enumerate_receiver_constellation,
    min_distance, select_pam_params, AlignError, Group, MonomialRole, NearestPointDecoder, PamCode, StructureMap,
    DEFAULT_ENUMERATION_CAP,
};
use crate::analysis::{
    dof_bounds, dof_slope, leakage_joint_entropy_exact, leakage_marginal_entropy, monte_carlo_pe,
    sum_uniform_counts,
};
use crate::channel::{
    check_general_position, null_space_basis, sample_compound_channel, transmit_receive, CompoundChannel,
};
use crate::schemes::{
    f3_decode_y1, f3_decode_y2, f3_encode, f3_equivocation, multilevel_equivocation, multilevel_scheme,
    timeshare_dof, MultilevelCode, SchemeOptions,
};
use crate::seed::{derive_seed, stream, StreamRng};

type Check = fn(u64) -> Result<(), String>;

/// One registered invariant.
#[derive(Clone, Copy)]
pub struct Invariant {
    pub suite: &'static str,
    pub name: &'static str,
    /// Library module the invariant belongs to.
    pub module: &'static str,
    check: Check,
}

impl Invariant {
    pub fn run(&self, seed: u64) -> CheckResult {
        let outcome = (self.check)(derive_seed(seed, &format!("verify/{}/{}", self.suite, self.name)));
        CheckResult {
            suite: self.suite,
            invariant: self.name,
            module: self.module,
            passed: outcome.is_ok(),
            counterexample: outcome.err().unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub suite: &'static str,
    pub invariant: &'static str,
    pub module: &'static str,
    pub passed: bool,
    pub counterexample: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub results: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    /// `suite,invariant,module,status,counterexample`, one row per check.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "invariant", "module", "status", "counterexample"])
            .expect("in-memory write");
        for r in &self.results {
            let status = if r.passed { "pass" } else { "fail" };
            w.write_record([r.suite, r.invariant, r.module, status, r.counterexample.as_str()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }
}

/// Number of invariants each module states; the registry must match.
pub const MODULE_INVARIANTS: [(&str, usize); 5] =
    [("channel", 3), ("align", 5), ("schemes", 5), ("analysis", 4), ("experiment", 2)];

pub fn registry() -> Vec<Invariant> {
    let inv = |suite, name, module, check: Check| Invariant {
        suite,
        name,
        module,
        check,
    };
    vec![
        inv("channel", "null_space_orthonormal", "channel", null_space_orthonormal),
        inv("channel", "null_space_annihilates", "channel", null_space_annihilates),
        inv("channel", "noiseless_linear", "channel", noiseless_linear),
        inv("structure", "partition", "align", structure_partition),
        inv("structure", "row_weight", "align", structure_row_weight),
        inv("alignment", "dmin_scaling", "align", dmin_scaling),
        inv("alignment", "pam_power", "align", pam_power),
        inv("alignment", "decode_inverts_encode", "align", decode_inverts_encode),
        inv("schemes", "dof_matches_slope", "schemes", dof_matches_slope),
        inv("schemes", "zf_leakage_zero", "schemes", zf_leakage_zero),
        inv("f3", "equivocation", "schemes", equivocation),
        inv("schemes", "timeshare_dof", "schemes", timeshare_closed_form),
        inv("schemes", "ia_rate_monotone", "schemes", ia_rate_monotone),
        inv("bounds", "ordering", "analysis", bounds_ordering),
        inv("entropy", "subadditivity", "analysis", subadditivity),
        inv("entropy", "pmf_normalized", "analysis", pmf_normalized),
        inv("montecarlo", "reproducible", "analysis", monte_carlo_reproducible),
        inv("determinism", "byte_identical", "experiment", byte_identical),
        inv("registry", "coverage", "experiment", coverage),
    ]
}

pub fn suites() -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    for i in registry() {
        if !out.contains(&i.suite) {
            out.push(i.suite);
        }
    }
    out
}

/// Runs every invariant of `suite`, or all of them, in registry order.
pub fn run_verify(suite: Option<&str>, seed: u64) -> Result<VerifyReport, ExperimentError> {
    let selected: Vec<Invariant> = registry()
        .into_iter()
        .filter(|i| suite.is_none_or(|s| s == "all" || s == i.suite))
        .collect();
    if selected.is_empty() {
        return Err(ExperimentError::Config(format!(
            "unknown suite {:?}; expected all or one of {}",
            suite.unwrap_or_default(),
            suites().join(", ")
        )));
    }
    Ok(VerifyReport {
        seed,
        results: selected.iter().map(|i| i.run(seed)).collect(),
    })
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_channels(seed: u64, count: u64, dims: impl Fn(&mut StreamRng) -> (usize, usize, usize)) -> Vec<CompoundChannel> {
    let mut rng = stream(seed, "shapes");
    (0..count)
        .map(|i| {
            let (m, j1, j2) = dims(&mut rng);
            sample_compound_channel(m, j1, j2, derive_seed(seed, &format!("channel/{i}")))
        })
        .collect()
}

fn null_space_orthonormal(seed: u64) -> Result<(), String> {
    for ch in random_channels(seed, 50, |r| {
        let m = r.random_range(2..=5);
        (m, 1, r.random_range(1..m))
    }) {
        let b = null_space_basis(ch.eaves()).map_err(|e| e.to_string())?;
        let gram = &b * b.transpose();
        let dev = (gram - DMatrix::identity(b.nrows(), b.nrows())).amax();
        ensure(dev < 1e-10, || format!("Gram deviation {dev:e} for channel {}", ch.to_json()))?;
    }
    Ok(())
}

fn null_space_annihilates(seed: u64) -> Result<(), String> {
    for ch in random_channels(seed, 50, |r| {
        let m = r.random_range(2..=5);
        (m, r.random_range(1..=4), r.random_range(1..m))
    }) {
        if !check_general_position(&ch) {
            continue;
        }
        let b = null_space_basis(ch.eaves()).map_err(|e| e.to_string())?;
        ensure(b.nrows() > 0, || format!("empty null space for {}", ch.to_json()))?;
        for g in ch.eaves() {
            for row in b.row_iter() {
                let v: Vec<f64> = row.iter().copied().collect();
                let ip = g.dot(&v);
                ensure(ip.abs() <= 1e-10, || format!("<row, g> = {ip:e} for {}", ch.to_json()))?;
            }
        }
    }
    Ok(())
}

fn noiseless_linear(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, "inputs");
    for ch in random_channels(seed, 20, |r| (r.random_range(1..=4), r.random_range(1..=3), r.random_range(1..=3))) {
        let ch = ch.with_noise_var(0.0).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..ch.antennas()).map(|_| rng.sample(StandardNormal)).collect();
        let a = transmit_receive(&ch, &x, 1);
        let b = transmit_receive(&ch, &x, 2);
        ensure(a == b, || format!("noiseless outputs differ across seeds for x={x:?}"))?;
        for (y, h) in a.legit.iter().zip(ch.legit()) {
            ensure(y.to_bits() == h.dot(&x).to_bits(), || format!("y={y} but h.x={}", h.dot(&x)))?;
        }
        for (z, g) in a.eaves.iter().zip(ch.eaves()) {
            ensure(z.to_bits() == g.dot(&x).to_bits(), || format!("z={z} but g.x={}", g.dot(&x)))?;
        }
    }
    Ok(())
}

/// Every structure map the alignment schemes build on `channel`: the
/// eavesdropper maps of the wiretap scheme, the legitimate maps of the
/// one-sided scheme, and both families of the two-sided scheme.
pub fn constructed_maps(channel: &CompoundChannel, n: u32) -> Result<Vec<(String, StructureMap)>, AlignError> {
    let m = channel.antennas();
    let cap = DEFAULT_ENUMERATION_CAP;
    let mut out = Vec::new();
    for (label, group, offset) in [
        ("S", Group::Eavesdroppers, 0),
        ("T", Group::Legitimate, 0),
        ("S1", Group::Eavesdroppers, 1),
        ("T2", Group::Legitimate, 1),
    ] {
        let set = build_monomial_set_with(group.gains(channel), n, MonomialRole::Generator, offset, cap)?;
        let pre = build_precoder(&set, m)?;
        let eff = effective_channels_with(&pre, channel, group, cap)?;
        out.extend(eff.maps.into_iter().enumerate().map(|(k, s)| (format!("{label}_{k}"), s)));
    }
    Ok(out)
}

fn structure_channels(seed: u64) -> Vec<(CompoundChannel, u32)> {
    let mut rng = stream(seed, "structure");
    (0..50u64)
        .map(|i| {
            let m = rng.random_range(2..=3);
            let j = rng.random_range(2..=3);
            let n = rng.random_range(1..=2);
            (sample_compound_channel(m, j, j, derive_seed(seed, &format!("channel/{i}"))), n)
        })
        .collect()
}

fn structure_partition(seed: u64) -> Result<(), String> {
    for (ch, n) in structure_channels(seed) {
        for (label, s) in constructed_maps(&ch, n).map_err(|e| e.to_string())? {
            ensure(s.is_partition(), || {
                format!("{label} (M={}, J={}, N={n}) is not a partition:\n{}", ch.antennas(), ch.j1(), s.to_text())
            })?;
        }
    }
    Ok(())
}

fn structure_row_weight(seed: u64) -> Result<(), String> {
    for (ch, n) in structure_channels(seed) {
        let m = ch.antennas();
        for (label, s) in constructed_maps(&ch, n).map_err(|e| e.to_string())? {
            let w = s.max_row_weight();
            ensure(w <= m, || format!("{label} (M={m}, J={}, N={n}) has a row of weight {w}", ch.j1()))?;
        }
    }
    Ok(())
}

/// `d_min(Q) Q^{L-1}` for `Q = 1..=q_max` with unit spacing, and the number
/// of coinciding points at each `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DminProfile {
    pub scaled: Vec<f64>,
    pub collisions: Vec<usize>,
}

impl DminProfile {
    /// A coincidence among integer combinations witnesses rational
    /// dependence of the coefficients.
    pub fn dependent(&self) -> bool {
        self.collisions.iter().any(|&c| c > 0)
    }

    /// `max / min` of the scaled distances.
    pub fn spread(&self) -> f64 {
        let max = self.scaled.iter().copied().fold(0.0, f64::max);
        let min = self.scaled.iter().copied().fold(f64::INFINITY, f64::min);
        max / min
    }
}

pub fn dmin_profile(alpha: &[f64], q_max: u32) -> Result<DminProfile, AlignError> {
    let l = alpha.len();
    let mut scaled = Vec::new();
    let mut collisions = Vec::new();
    for q in 1..=q_max {
        let pam = PamCode { a: 1.0, q, dims: l, gamma: 1.0 };
        let c = enumerate_receiver_constellation(alpha, &pam)?;
        scaled.push(min_distance(&c).unwrap_or(0.0) * f64::from(q).powi(l as i32 - 1));
        collisions.push(c.collisions());
    }
    Ok(DminProfile { scaled, collisions })
}

/// Coefficient vectors with i.i.d. standard normal entries.
pub fn random_alphas(seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, "alpha");
    (0..count)
        .map(|i| {
            let l = 2 + i % 2;
            (0..l).map(|_| rng.sample(StandardNormal)).collect()
        })
        .collect()
}

fn dmin_scaling(seed: u64) -> Result<(), String> {
    let alphas = random_alphas(seed, 20);
    let mut outside = Vec::new();
    for alpha in &alphas {
        let prof = dmin_profile(alpha, 8).map_err(|e| e.to_string())?;
        ensure(!prof.dependent(), || format!("alpha={alpha:?} collides: {:?}", prof.collisions))?;
        if prof.spread() > 50.0 {
            outside.push(format!("alpha={alpha:?} scaled dmin {:?}", prof.scaled));
        }
    }
    ensure(outside.is_empty(), || {
        format!("{} of {} alphas leave the band; {}", outside.len(), alphas.len(), outside.join("; "))
    })
}

fn pam_power(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, "alpha");
    for e in (4..=40).step_by(4) {
        let p = 2f64.powi(e);
        for dims in [1usize, 2, 4, 8, 16, 32] {
            for eps in [0.01, 0.1, 0.3, 0.5] {
                let alpha: Vec<f64> = (0..dims).map(|_| rng.sample(StandardNormal)).collect();
                let norm_sq: f64 = alpha.iter().map(|a| a * a).sum();
                let pam = select_pam_params(p, dims, eps, norm_sq.sqrt().recip()).map_err(|e| e.to_string())?;
                let power = pam.average_power(norm_sq);
                ensure(power <= p * (1.0 + 1e-12), || {
                    format!("P={p}, dims={dims}, eps={eps}: average power {power}")
                })?;
            }
        }
    }
    Ok(())
}

fn decode_inverts_encode(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, "noise");
    for alpha in random_alphas(seed, 6) {
        for q in 1..=3 {
            let pam = PamCode { a: 0.5, q, dims: alpha.len(), gamma: 1.0 };
            let dec = NearestPointDecoder::new(&alpha, &pam).map_err(|e| e.to_string())?;
            let half = dec.min_distance().map_or(f64::INFINITY, |d| d / 2.0);
            let c = dec.constellation();
            for idx in 0..c.tuples() as u64 {
                let b = c.tuple(idx);
                let y: f64 = alpha.iter().zip(&b).map(|(a, &s)| pam.a * a * s as f64).sum();
                let noise = half * rng.random_range(-0.999..0.999);
                let got = dec.decode(y + noise);
                ensure(got == b, || format!("alpha={alpha:?}, Q={q}: sent {b:?}, noise {noise}, got {got:?}"))?;
            }
        }
    }
    Ok(())
}

const SWEEP: [i32; 16] = [10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34, 36, 38, 40];

fn dof_matches_slope(seed: u64) -> Result<(), String> {
    let opts = SchemeOptions {
        seed,
        ..SchemeOptions::default()
    };
    let cases = [
        (SchemeKind::Zf, (3, 2, 2)),
        (SchemeKind::An, (3, 2, 3)),
        (SchemeKind::PbZf, (3, 2, 2)),
        (SchemeKind::TimeshareMulticast, (2, 3, 2)),
        (SchemeKind::TimeshareEaves, (3, 3, 4)),
        (SchemeKind::Pairwise, (2, 2, 2)),
    ];
    for (i, (kind, (m, j1, j2))) in cases.into_iter().enumerate() {
        let ch = sample_compound_channel(m, j1, j2, derive_seed(seed, &format!("channel/{i}")));
        let mut pts = Vec::new();
        let mut dof = 0.0;
        for e in SWEEP {
            let p = 2f64.powi(e);
            let r = run_scheme(kind, &ch.clone().with_power(p).map_err(|e| e.to_string())?, 1, 0.1, &opts)
                .map_err(|e| format!("{kind}: {e}"))?;
            dof = r.dof_contribution;
            pts.push((p, r.rate_bits));
        }
        let slope = dof_slope(&pts).map_err(|e| e.to_string())?;
        ensure((slope - dof).abs() <= 0.05, || {
            format!("{kind} on M={m}, J1={j1}, J2={j2}: slope {slope} vs dof {dof}")
        })?;
    }
    Ok(())
}

fn zf_leakage_zero(seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, "messages");
    for ch in random_channels(seed, 50, |r| {
        let m = r.random_range(2..=6);
        (m, r.random_range(1..=3), r.random_range(1..m))
    }) {
        let b = null_space_basis(ch.eaves()).map_err(|e| e.to_string())?;
        let msg: Vec<f64> = (0..b.nrows()).map(|_| rng.sample(StandardNormal)).collect();
        let x: Vec<f64> = (0..ch.antennas())
            .map(|c| (0..b.nrows()).map(|r| b[(r, c)] * msg[r]).sum())
            .collect();
        for g in ch.eaves() {
            let leak = g.dot(&x);
            ensure(leak.abs() <= 1e-10, || format!("<g, B^T m> = {leak:e} on {}", ch.to_json()))?;
        }
    }
    Ok(())
}

fn equivocation(_seed: u64) -> Result<(), String> {
    for bit in 0..2u8 {
        for coin in 0..2u8 {
            let (x1, x2) = f3_encode(bit, coin);
            let sum = (x1 + x2) % 3;
            let diff = (x1 + 3 - x2) % 3;
            ensure(f3_decode_y1(sum) == bit && f3_decode_y2(diff) == bit, || {
                format!("F3 word ({x1}, {x2}) for bit {bit}, coin {coin} decodes wrongly")
            })?;
        }
    }
    let eq = f3_equivocation();
    ensure(eq.iter().all(|&h| (h - 1.0).abs() < 1e-12), || format!("F3 equivocation {eq:?}"))?;
    for mlev in 2..=5 {
        for t in 1..mlev {
            let code = MultilevelCode::new(t, mlev).map_err(|e| e.to_string())?;
            if code.message_bits() > 4 {
                continue;
            }
            let eq = multilevel_equivocation(&code).map_err(|e| e.to_string())?;
            let want = code.message_bits() as f64;
            ensure(eq.iter().all(|&h| (h - want).abs() < 1e-9), || {
                format!("T={t}, Mlev={mlev}: equivocation {eq:?}, expected {want}")
            })?;
        }
    }
    Ok(())
}

fn timeshare_closed_form(_seed: u64) -> Result<(), String> {
    for m in 2..=8u32 {
        for j in m..=60 {
            let count = crate::schemes::binomial(u64::from(j), u64::from(m - 1)).unwrap_or(u128::MAX);
            if count > 10_000 {
                continue;
            }
            let got = timeshare_dof(m, j).map_err(|e| e.to_string())?;
            let want = num_rational::Ratio::new(i64::from(m) - 1, i64::from(j));
            ensure(got == want, || format!("M={m}, J={j}: {got} vs {want}"))?;
        }
    }
    Ok(())
}

fn ia_rate_monotone(seed: u64) -> Result<(), String> {
    let opts = SchemeOptions {
        seed,
        ..SchemeOptions::default()
    };
    let cases = [
        (SchemeKind::Ia, (2, 2, 2), 1),
        (SchemeKind::Ia, (2, 2, 2), 2),
        (SchemeKind::PbOneSided, (2, 2, 1), 2),
        (SchemeKind::PbDouble, (2, 2, 2), 1),
    ];
    for (i, (kind, (m, j1, j2), n)) in cases.into_iter().enumerate() {
        let ch = sample_compound_channel(m, j1, j2, derive_seed(seed, &format!("channel/{i}")));
        let mut prev = f64::NEG_INFINITY;
        for e in SWEEP {
            let p = 2f64.powi(e);
            let r = run_scheme(kind, &ch.clone().with_power(p).map_err(|e| e.to_string())?, n, 0.1, &opts)
                .map_err(|e| format!("{kind}: {e}"))?;
            ensure(r.rate_bits >= prev, || {
                format!("{kind} N={n}: rate {} at P=2^{e} below {prev} at the previous point", r.rate_bits)
            })?;
            prev = r.rate_bits;
        }
    }
    Ok(())
}

fn bounds_ordering(_seed: u64) -> Result<(), String> {
    for m in 1..=6 {
        for j1 in 1..=8 {
            for j2 in 1..=8 {
                let b = dof_bounds(m, j1, j2);
                ensure(b.ordered(), || format!("{b:?}"))?;
            }
        }
    }
    Ok(())
}

fn subadditivity(seed: u64) -> Result<(), String> {
    let mut maps: Vec<(String, StructureMap)> = Vec::new();
    let ch = sample_compound_channel(2, 1, 1, derive_seed(seed, "channel"));
    maps.extend(constructed_maps(&ch, 1).map_err(|e| e.to_string())?);
    maps.extend(constructed_maps(&ch, 2).map_err(|e| e.to_string())?);
    let mut rng = stream(seed, "maps");
    for i in 0..40 {
        let cols = rng.random_range(1..=10);
        let rows = rng.random_range(1..=cols);
        let mut ones = vec![Vec::new(); rows];
        for c in 0..cols {
            ones[rng.random_range(0..rows)].push(c);
        }
        maps.push((format!("random_{i}"), StructureMap::new(cols, ones).map_err(|e| e.to_string())?));
    }
    for cols in 1..=10 {
        maps.push((format!("identity_{cols}"), StructureMap::identity(cols)));
    }
    for (label, s) in &maps {
        for q in 1..=2u32 {
            if (2 * q as u64 + 1).pow(s.cols() as u32) > DEFAULT_ENUMERATION_CAP {
                continue;
            }
            let joint = leakage_joint_entropy_exact(s, q).map_err(|e| e.to_string())?;
            let marginal = leakage_marginal_entropy(s, q);
            ensure(joint <= marginal + 1e-9, || {
                format!("{label}, Q={q}: joint {joint} > marginal {marginal}\n{}", s.to_text())
            })?;
            if s.max_row_weight() <= 1 {
                let want = s.cols() as f64 * f64::from(2 * q + 1).log2();
                ensure((joint - want).abs() < 1e-9, || format!("{label}, Q={q}: identity joint {joint} vs {want}"))?;
            }
        }
    }
    Ok(())
}

fn pmf_normalized(_seed: u64) -> Result<(), String> {
    for w in 1..=6 {
        for q in 1..=5u32 {
            let counts = sum_uniform_counts(w, q);
            let total: u128 = counts.iter().sum();
            let mass: f64 = counts.iter().map(|&c| c as f64 / total as f64).sum();
            ensure((mass - 1.0).abs() < 1e-12, || format!("w={w}, Q={q}: mass {mass}"))?;
            ensure(total == u128::from(2 * q + 1).pow(w as u32), || format!("w={w}, Q={q}: total {total}"))?;
            ensure(counts.iter().eq(counts.iter().rev()), || format!("w={w}, Q={q}: asymmetric {counts:?}"))?;
        }
    }
    Ok(())
}

fn monte_carlo_reproducible(seed: u64) -> Result<(), String> {
    let coin = |rng: &mut StreamRng| rng.random_bool(0.3);
    let a = monte_carlo_pe(&coin, 5000, seed);
    let b = monte_carlo_pe(&coin, 5000, seed);
    ensure(a == b, || format!("{a:?} vs {b:?}"))?;
    let opts = SchemeOptions {
        seed,
        trials: 2000,
        ..SchemeOptions::default()
    };
    let p = 2.0 * 3f64.powi(12);
    let x = multilevel_scheme(p, 1.0, 1e-2, &opts).map_err(|e| e.to_string())?;
    let y = multilevel_scheme(p, 1.0, 1e-2, &opts).map_err(|e| e.to_string())?;
    ensure(x.pe == y.pe, || format!("{:?} vs {:?}", x.pe, y.pe))
}

fn byte_identical(seed: u64) -> Result<(), String> {
    let grid = BoundsGrid::default();
    ensure(run_bounds(&grid) == run_bounds(&grid), || "bounds tables differ".into())?;
    for (scheme, m, j1, j2) in [(SchemeKind::Zf, 2, 1, 1), (SchemeKind::An, 3, 2, 3)] {
        let cfg = ExperimentConfig {
            scheme,
            channel: ChannelSpec::Sampled { m, j1, j2 },
            powers: vec![1e2, 1e4, 1e6, 1e8],
            seed,
            ..Default::default()
        };
        let a = run_sweep(&cfg).map_err(|e| e.to_string())?.to_csv();
        let b = run_sweep(&cfg).map_err(|e| e.to_string())?.to_csv();
        ensure(a == b, || format!("{scheme} sweeps differ:\n{a}\n{b}"))?;
    }
    Ok(())
}

fn coverage(_seed: u64) -> Result<(), String> {
    let reg = registry();
    for (module, want) in MODULE_INVARIANTS {
        let got = reg.iter().filter(|i| i.module == module).count();
        ensure(got == want, || format!("module {module}: {got} registered, {want} stated"))?;
    }
    let total: usize = MODULE_INVARIANTS.iter().map(|(_, n)| n).sum();
    ensure(reg.len() == total, || format!("{} registered, {total} stated", reg.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique() {
        let reg = registry();
        for (i, a) in reg.iter().enumerate() {
            for b in &reg[i + 1..] {
                assert!((a.suite, a.name) != (b.suite, b.name));
            }
        }
    }

    #[test]
    fn unknown_suite_is_a_config_error() {
        assert!(matches!(run_verify(Some("nope"), 0), Err(ExperimentError::Config(_))));
    }

    #[test]
    fn cheap_suites_pass() {
        for suite in ["bounds", "f3", "registry", "channel"] {
            let rep = run_verify(Some(suite), 1).unwrap();
            assert!(rep.all_passed(), "{}", rep.to_csv());
        }
    }

    #[test]
    fn failing_check_dumps_counterexample() {
        let bad = Invariant {
            suite: "x",
            name: "y",
            module: "z",
            check: |_| Err("witness".into()),
        };
        let r = bad.run(0);
        assert!(!r.passed);
        assert_eq!(r.counterexample, "witness");
        let rep = VerifyReport { seed: 0, results: vec![r] };
        assert!(rep.to_csv().ends_with("x,y,z,fail,witness\n"));
    }
}

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{BoundsGrid, ExperimentConfig, SchemeKind};
use super::ExperimentError;
use crate::analysis::{dof_bounds, dof_slope, pairwise_bound_rate, DofBounds};
use crate::channel::CompoundChannel;
use crate::schemes::{
    artificial_noise_rate, ia_wiretap_limit, ia_wiretap_scheme, multilevel_scheme, pb_double_ia, pb_double_limit,
    pb_one_sided_ia, pb_one_sided_limit, pb_zero_force, timeshare_dof, timeshare_eavesdropper_plan,
    timeshare_multicast_plan, zf_eavesdroppers_rate, SchemeError, SchemeOptions, SchemeReport, CSV_HEADER,
};

fn ratio_text(r: Ratio<i64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

pub const BOUNDS_HEADER: [&str; 13] = [
    "M", "J1", "J2", "d_L", "d_TS", "d_U", "ds_L", "ds_U", "d_L_f", "d_TS_f", "d_U_f", "ds_L_f", "ds_U_f",
];

/// One row per `(M, J1, J2)` of the grid, in lexicographic order.
pub fn bounds_table(grid: &BoundsGrid) -> Vec<DofBounds> {
    let mut out = Vec::new();
    for m in grid.m.values() {
        for j1 in grid.j1.values() {
            for j2 in grid.j2.values() {
                out.push(dof_bounds(m, j1, j2));
            }
        }
    }
    out
}

/// Bounds table as CSV: exact values as `p/q` followed by their floats.
pub fn run_bounds(grid: &BoundsGrid) -> String {
    let rows: Vec<Vec<String>> = bounds_table(grid)
        .iter()
        .map(|b| {
            let vals = [b.d_l, b.d_ts, b.d_u, b.ds_l, b.ds_u];
            [b.m.to_string(), b.j1.to_string(), b.j2.to_string()]
                .into_iter()
                .chain(vals.iter().map(|&r| ratio_text(r)))
                .chain(vals.iter().map(|&r| DofBounds::as_f64(r).to_string()))
                .collect()
        })
        .collect();
    csv_text(&BOUNDS_HEADER, &rows)
}

/// Unclamped analytic high-power limit of `rate / (1/2 log2 P)`.
pub fn analytic_limit(kind: SchemeKind, m: usize, j1: usize, j2: usize, n: u32, eps: f64) -> Option<f64> {
    let (lo, hi) = (j1.min(j2), j1.max(j2));
    let ts = |j: usize| timeshare_dof(m as u32, j as u32).ok().map(DofBounds::as_f64);
    match kind {
        SchemeKind::Zf | SchemeKind::An | SchemeKind::Pairwise => Some(1.0),
        SchemeKind::PbZf => Some(2.0),
        SchemeKind::Ia => Some(ia_wiretap_limit(m, j2, n, eps)),
        SchemeKind::PbOneSided => Some(pb_one_sided_limit(m, hi, n, eps)),
        SchemeKind::PbDouble => Some(pb_double_limit(m, hi, n, eps)),
        SchemeKind::Multilevel => Some(3f64.ln().recip() * 2f64.ln()),
        SchemeKind::TimeshareMulticast => ts(j1),
        SchemeKind::TimeshareEaves => ts(j2).filter(|_| lo >= m),
    }
}

fn options(config: &ExperimentConfig) -> SchemeOptions {
    SchemeOptions {
        seed: config.seed,
        trials: config.trials,
        cap: config.cap,
        ..SchemeOptions::default()
    }
}

/// Tightest pairwise bound over every receiver and eavesdropper pair.
fn pairwise_report(channel: &CompoundChannel) -> Result<SchemeReport, SchemeError> {
    let (m, p) = (channel.antennas(), channel.power());
    let mut rate = f64::INFINITY;
    for h in channel.legit() {
        for g in channel.eaves() {
            rate = rate.min(pairwise_bound_rate(h.as_slice(), g.as_slice(), p, m)?);
        }
    }
    let mut report = SchemeReport::new("pairwise", m, channel.j1(), channel.j2(), p);
    report.rate_bits = rate;
    report.dof_contribution = 1.0;
    Ok(report)
}

/// Runs `kind` once on `channel` at its configured power.
pub fn run_scheme(
    kind: SchemeKind,
    channel: &CompoundChannel,
    n: u32,
    eps: f64,
    options: &SchemeOptions,
) -> Result<SchemeReport, SchemeError> {
    match kind {
        SchemeKind::Zf => zf_eavesdroppers_rate(channel),
        SchemeKind::An => artificial_noise_rate(channel, options),
        SchemeKind::PbZf => pb_zero_force(channel, options),
        SchemeKind::Ia => ia_wiretap_scheme(channel, n, eps, options),
        SchemeKind::PbOneSided => pb_one_sided_ia(channel, n, eps, options),
        SchemeKind::PbDouble => pb_double_ia(channel, n, eps, options),
        SchemeKind::Multilevel => multilevel_scheme(channel.power(), channel.noise_var(), eps, options),
        SchemeKind::TimeshareMulticast => timeshare_multicast_plan(channel, options).map(|(_, r)| r),
        SchemeKind::TimeshareEaves => timeshare_eavesdropper_plan(channel, options).map(|(_, r)| r),
        SchemeKind::Pairwise => pairwise_report(channel),
    }
}

/// Outcome of a power sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub scheme: SchemeKind,
    pub reports: Vec<SchemeReport>,
    pub limit: Option<f64>,
    /// Fitted `d(rate) / d(1/2 log2 P)`; absent when the grid is too narrow.
    pub slope: Option<f64>,
    /// Matching lower and upper bound of the bounds table.
    pub bound_lower: f64,
    pub bound_upper: f64,
}

pub const SWEEP_EXTRA_HEADER: [&str; 5] = ["limit", "rate_ratio", "slope", "bound_lower", "bound_upper"];

impl SweepResult {
    pub fn header() -> Vec<&'static str> {
        CSV_HEADER.iter().chain(SWEEP_EXTRA_HEADER.iter()).copied().collect()
    }

    /// One row per power followed by a `<scheme>:fit` summary row.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut rows: Vec<Vec<String>> = self
            .reports
            .iter()
            .map(|r| {
                let mut row = r.csv_record();
                row.extend([opt(self.limit), r.rate_ratio().to_string(), String::new(), String::new(), String::new()]);
                row
            })
            .collect();
        if let Some(first) = self.reports.first() {
            let dof = self.reports.last().map_or(0.0, |r| r.dof_contribution);
            let mut fit = vec![String::new(); CSV_HEADER.len() + SWEEP_EXTRA_HEADER.len()];
            fit[0] = format!("{}:fit", self.scheme);
            fit[1] = first.m.to_string();
            fit[2] = first.j1.to_string();
            fit[3] = first.j2.to_string();
            fit[5] = first.n.map(|n| n.to_string()).unwrap_or_default();
            fit[6] = first.eps.map(|e| e.to_string()).unwrap_or_default();
            fit[11] = dof.to_string();
            fit[12] = opt(self.limit);
            fit[14] = opt(self.slope);
            fit[15] = self.bound_lower.to_string();
            fit[16] = self.bound_upper.to_string();
            rows.push(fit);
        }
        csv_text(&Self::header(), &rows)
    }
}

/// Runs the configured scheme at every grid power. Grid points run in
/// parallel; rows come back in grid order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, ExperimentError> {
    config.validate()?;
    let channel = config.channel()?;
    let opts = options(config);
    let kind = config.scheme;
    let results: Vec<Result<SchemeReport, ExperimentError>> = config
        .powers
        .par_iter()
        .map(|&p| {
            let ch = channel
                .clone()
                .with_power(p)
                .map_err(|e| ExperimentError::Config(e.to_string()))?;
            run_scheme(kind, &ch, config.n, config.eps, &opts).map_err(|source| ExperimentError::Scheme {
                scheme: kind.name(),
                power: p,
                source,
            })
        })
        .collect();
    let reports = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let first = &reports[0];
    let (m, j1, j2) = (first.m, first.j1, first.j2);
    let points: Vec<(f64, f64)> = reports.iter().map(|r| (r.power, r.rate_bits)).collect();
    let b = dof_bounds(m as u32, j1 as u32, j2 as u32);
    let (lower, upper) = if kind.is_broadcast() { (b.ds_l, b.ds_u) } else { (b.d_l, b.d_u) };
    Ok(SweepResult {
        scheme: kind,
        limit: analytic_limit(kind, m, j1, j2, config.n, config.eps),
        slope: dof_slope(&points).ok(),
        bound_lower: DofBounds::as_f64(lower),
        bound_upper: DofBounds::as_f64(upper),
        reports,
    })
}

/// Single run at the highest configured power, with Monte Carlo.
#[derive(Debug, Clone, Serialize)]
pub struct Simulation {
    pub scheme: SchemeKind,
    pub seed: u64,
    pub limit: Option<f64>,
    pub report: SchemeReport,
}

impl Simulation {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("simulation serializes");
        s.push('\n');
        s
    }
}

pub fn simulate(config: &ExperimentConfig) -> Result<Simulation, ExperimentError> {
    config.validate()?;
    let p = *config.powers.last().expect("validated grid is nonempty");
    let channel = config
        .channel()?
        .with_power(p)
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let kind = config.scheme;
    let report = run_scheme(kind, &channel, config.n, config.eps, &options(config)).map_err(|source| {
        ExperimentError::Scheme {
            scheme: kind.name(),
            power: p,
            source,
        }
    })?;
    Ok(Simulation {
        scheme: kind,
        seed: config.seed,
        limit: analytic_limit(kind, report.m, report.j1, report.j2, config.n, config.eps),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::{ChannelSpec, GridRange};

    fn grid(m: u32, j1: u32, j2: u32) -> BoundsGrid {
        BoundsGrid {
            m: GridRange { from: m, to: m },
            j1: GridRange { from: j1, to: j1 },
            j2: GridRange { from: j2, to: j2 },
        }
    }

    #[test]
    fn single_bounds_row() {
        let csv = run_bounds(&grid(2, 2, 2));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], BOUNDS_HEADER.join(","));
        assert!(lines[1].starts_with("2,2,2,1/2,1/2,2/3,2/3,1/1,0.5,"), "{}", lines[1]);
    }

    #[test]
    fn full_grid_row_count() {
        let csv = run_bounds(&BoundsGrid::default());
        assert_eq!(csv.lines().count(), 1 + 6 * 8 * 8);
        assert_eq!(csv, run_bounds(&BoundsGrid::default()));
    }

    #[test]
    fn zf_sweep_slope() {
        let cfg = ExperimentConfig {
            channel: ChannelSpec::Sampled { m: 2, j1: 1, j2: 1 },
            powers: vec![1e2, 1e3, 1e4, 1e5, 1e6],
            seed: 4,
            ..Default::default()
        };
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.reports.len(), 5);
        assert!((res.slope.unwrap() - 1.0).abs() < 0.05);
        let csv = res.to_csv();
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.lines().last().unwrap().starts_with("zf:fit,2,1,1,"));
    }

    #[test]
    fn ia_sweep_reports_plug_in_limit() {
        let cfg = ExperimentConfig {
            scheme: SchemeKind::Ia,
            channel: ChannelSpec::Sampled { m: 2, j1: 2, j2: 2 },
            powers: vec![2f64.powi(10), 2f64.powi(15), 2f64.powi(20)],
            n: 2,
            eps: 0.1,
            trials: 1,
            ..Default::default()
        };
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.limit, Some(ia_wiretap_limit(2, 2, 2, 0.1)));
    }

    #[test]
    fn invalid_scheme_for_channel() {
        let cfg = ExperimentConfig {
            channel: ChannelSpec::Sampled { m: 2, j1: 1, j2: 2 },
            ..Default::default()
        };
        assert!(matches!(run_sweep(&cfg), Err(ExperimentError::Config(_))));
    }

    #[test]
    fn runtime_failures_name_the_power() {
        let cfg = ExperimentConfig {
            scheme: SchemeKind::Multilevel,
            powers: vec![10.0, 2.0 * 3f64.powi(20)],
            ..Default::default()
        };
        match run_sweep(&cfg) {
            Err(ExperimentError::Scheme { scheme, power, .. }) => {
                assert_eq!(scheme, "multilevel");
                assert_eq!(power, 10.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn simulate_uses_top_power() {
        let cfg = ExperimentConfig {
            scheme: SchemeKind::Multilevel,
            powers: vec![2.0 * 3f64.powi(10), 2.0 * 3f64.powi(20)],
            trials: 200,
            eps: 1e-2,
            ..Default::default()
        };
        let sim = simulate(&cfg).unwrap();
        assert_eq!(sim.report.power, 2.0 * 3f64.powi(20));
        assert_eq!(sim.report.pe.unwrap().trials, 200);
        assert_eq!(sim.to_json(), simulate(&cfg).unwrap().to_json());
    }
}

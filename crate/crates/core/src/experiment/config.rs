use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::channel::{sample_compound_channel, CompoundChannel};
use crate::seed::derive_seed;

/// Every scheme or bound the sweep and simulate commands can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Zf,
    An,
    PbZf,
    Ia,
    PbOneSided,
    PbDouble,
    Multilevel,
    TimeshareMulticast,
    TimeshareEaves,
    Pairwise,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 10] = [
        SchemeKind::Zf,
        SchemeKind::An,
        SchemeKind::PbZf,
        SchemeKind::Ia,
        SchemeKind::PbOneSided,
        SchemeKind::PbDouble,
        SchemeKind::Multilevel,
        SchemeKind::TimeshareMulticast,
        SchemeKind::TimeshareEaves,
        SchemeKind::Pairwise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Zf => "zf",
            SchemeKind::An => "an",
            SchemeKind::PbZf => "pb_zf",
            SchemeKind::Ia => "ia",
            SchemeKind::PbOneSided => "pb_one_sided",
            SchemeKind::PbDouble => "pb_double",
            SchemeKind::Multilevel => "multilevel",
            SchemeKind::TimeshareMulticast => "timeshare_multicast",
            SchemeKind::TimeshareEaves => "timeshare_eaves",
            SchemeKind::Pairwise => "pairwise",
        }
    }

    /// Whether the scheme carries two messages and is measured against the
    /// sum-rate bounds.
    pub fn is_broadcast(self) -> bool {
        matches!(self, SchemeKind::PbZf | SchemeKind::PbOneSided | SchemeKind::PbDouble)
    }

    /// Checks the antenna and receiver counts a scheme needs.
    pub fn check(self, m: usize, j1: usize, j2: usize) -> Result<(), String> {
        let (lo, hi) = (j1.min(j2), j1.max(j2));
        let ok = match self {
            SchemeKind::Zf => j2 < m,
            SchemeKind::An => j1 < m,
            SchemeKind::PbZf => hi < m,
            SchemeKind::Ia | SchemeKind::PbDouble => lo >= m,
            SchemeKind::PbOneSided => lo < m && m <= hi,
            SchemeKind::TimeshareMulticast | SchemeKind::TimeshareEaves => m >= 2 && lo >= m,
            SchemeKind::Multilevel => true,
            SchemeKind::Pairwise => m >= 2,
        };
        if ok {
            return Ok(());
        }
        let need = match self {
            SchemeKind::Zf => "J2 < M",
            SchemeKind::An => "J1 < M",
            SchemeKind::PbZf => "max(J1, J2) < M",
            SchemeKind::Ia | SchemeKind::PbDouble => "min(J1, J2) >= M",
            SchemeKind::PbOneSided => "min(J1, J2) < M <= max(J1, J2)",
            SchemeKind::TimeshareMulticast | SchemeKind::TimeshareEaves => "min(J1, J2) >= M >= 2",
            SchemeKind::Multilevel => unreachable!("the multilevel scheme runs on a fixed channel"),
            SchemeKind::Pairwise => "M >= 2",
        };
        Err(format!("scheme {} needs {need}, got M={m}, J1={j1}, J2={j2}", self.name()))
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SchemeKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown scheme {s:?}; expected one of {}", names.join(", "))
            })
    }
}

/// Where the channel of an experiment comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// Gains written out in full; the power field is replaced by the grid.
    Inline(CompoundChannel),
    /// Gains drawn from the `"channel"` stream of the experiment seed.
    Sampled {
        #[serde(rename = "M")]
        m: usize,
        #[serde(rename = "J1")]
        j1: usize,
        #[serde(rename = "J2")]
        j2: usize,
    },
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec::Sampled { m: 2, j1: 1, j2: 1 }
    }
}

/// Inclusive integer range for the bounds table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub from: u32,
    pub to: u32,
}

impl GridRange {
    pub fn values(self) -> std::ops::RangeInclusive<u32> {
        self.from..=self.to
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsGrid {
    #[serde(rename = "M")]
    pub m: GridRange,
    #[serde(rename = "J1")]
    pub j1: GridRange,
    #[serde(rename = "J2")]
    pub j2: GridRange,
}

impl Default for BoundsGrid {
    fn default() -> Self {
        Self {
            m: GridRange { from: 1, to: 6 },
            j1: GridRange { from: 1, to: 8 },
            j2: GridRange { from: 1, to: 8 },
        }
    }
}

fn default_powers() -> Vec<f64> {
    (10..=40).step_by(2).map(|e| 2f64.powi(e)).collect()
}

fn default_n() -> u32 {
    2
}

fn default_eps() -> f64 {
    0.1
}

fn default_trials() -> u64 {
    1000
}

fn default_noise_var() -> f64 {
    1.0
}

fn default_cap() -> u64 {
    crate::align::DEFAULT_ENUMERATION_CAP
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_scheme")]
    pub scheme: SchemeKind,
    #[serde(default)]
    pub channel: ChannelSpec,
    /// Transmit powers, strictly increasing.
    #[serde(default = "default_powers")]
    pub powers: Vec<f64>,
    #[serde(rename = "N", default = "default_n")]
    pub n: u32,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_noise_var")]
    pub noise_var: f64,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub bounds: BoundsGrid,
}

fn default_scheme() -> SchemeKind {
    SchemeKind::Zf
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<u64>,
    pub scheme: Option<SchemeKind>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(trials) = o.trials {
            self.trials = trials;
        }
        if let Some(scheme) = o.scheme {
            self.scheme = scheme;
        }
    }

    /// `(M, J1, J2)` of the configured channel.
    pub fn dimensions(&self) -> (usize, usize, usize) {
        match &self.channel {
            ChannelSpec::Inline(c) => (c.antennas(), c.j1(), c.j2()),
            ChannelSpec::Sampled { m, j1, j2 } => (*m, *j1, *j2),
        }
    }

    /// The channel at unit power with the configured noise variance.
    pub fn channel(&self) -> Result<CompoundChannel, ExperimentError> {
        let base = match &self.channel {
            ChannelSpec::Inline(c) => c.clone(),
            ChannelSpec::Sampled { m, j1, j2 } => {
                sample_compound_channel(*m, *j1, *j2, derive_seed(self.seed, "channel"))
            }
        };
        base.with_noise_var(self.noise_var)
            .map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.powers.is_empty() {
            return bad("power grid is empty".into());
        }
        if let Some(p) = self.powers.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
            return bad(format!("every power must be finite and above 1, got {p}"));
        }
        if let Some(w) = self.powers.windows(2).find(|w| w[0] >= w[1]) {
            return bad(format!("power grid must be strictly increasing, got {} then {}", w[0], w[1]));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n == 0 {
            return bad("N must be at least 1".into());
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if !(self.noise_var.is_finite() && self.noise_var >= 0.0) {
            return bad(format!("noise_var must be finite and nonnegative, got {}", self.noise_var));
        }
        if let ChannelSpec::Sampled { m, j1, j2 } = self.channel {
            if m == 0 || j1 == 0 || j2 == 0 {
                return bad(format!("M, J1, J2 must be positive, got M={m}, J1={j1}, J2={j2}"));
            }
        }
        for (name, r) in [("M", self.bounds.m), ("J1", self.bounds.j1), ("J2", self.bounds.j2)] {
            if r.from == 0 || r.from > r.to {
                return bad(format!("bounds range for {name} must be nonempty and start at 1 or more"));
            }
        }
        let (m, j1, j2) = self.dimensions();
        self.scheme.check(m, j1, j2).map_err(ExperimentError::Config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ExperimentConfig::default();
        assert_eq!(c.scheme, SchemeKind::Zf);
        assert_eq!(c.powers.len(), 16);
        c.validate().unwrap();
    }

    #[test]
    fn flags_win() {
        let mut c = ExperimentConfig::from_json(r#"{"seed": 3, "trials": 10, "scheme": "an"}"#).unwrap();
        c.apply(&Overrides {
            seed: Some(9),
            trials: None,
            scheme: Some(SchemeKind::Zf),
            out: Some("x.csv".into()),
        });
        assert_eq!((c.seed, c.trials, c.scheme), (9, 10, SchemeKind::Zf));
        assert_eq!(c.out.as_deref(), Some(Path::new("x.csv")));
    }

    #[test]
    fn rejects_bad_grids() {
        for text in [
            r#"{"powers": [100, 10]}"#,
            r#"{"powers": [10, 10]}"#,
            r#"{"powers": []}"#,
            r#"{"trials": 0}"#,
            r#"{"eps": 1.5}"#,
            r#"{"channel": {"sampled": {"M": 2, "J1": 1, "J2": 2}}}"#,
        ] {
            let c = ExperimentConfig::from_json(text).unwrap();
            assert!(matches!(c.validate(), Err(ExperimentError::Config(_))), "{text}");
        }
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for k in SchemeKind::ALL {
            assert_eq!(k.name().parse::<SchemeKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!("nope".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn inline_channel_round_trips() {
        let ch = CompoundChannel::from_rows(&[&[1.0, 0.5]], &[&[0.25, 1.0]], 2.0).unwrap();
        let c = ExperimentConfig {
            channel: ChannelSpec::Inline(ch.clone()),
            ..Default::default()
        };
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.channel().unwrap().legit(), ch.legit());
    }
}

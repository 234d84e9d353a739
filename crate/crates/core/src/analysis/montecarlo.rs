use rayon::prelude::*;
use serde::Serialize;

use crate::seed::{trial_stream, StreamRng};

/// One randomized transmission. Everything random in a trial, including the
/// message, must be drawn from the supplied stream.
pub trait Experiment: Sync {
    /// Runs one trial and reports whether any receiver decoded wrongly.
    fn trial(&self, rng: &mut StreamRng) -> bool;
}

impl<F> Experiment for F
where
    F: Fn(&mut StreamRng) -> bool + Sync,
{
    fn trial(&self, rng: &mut StreamRng) -> bool {
        self(rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeEstimate {
    pub errors: u64,
    pub trials: u64,
    pub pe: f64,
    /// Wilson 95% interval.
    pub ci95: (f64, f64),
}

impl PeEstimate {
    pub fn upper(&self) -> f64 {
        self.ci95.1
    }
}

/// Wilson score interval at `z = 1.96`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Error rate over `trials` independent trials. Trial `i` draws from the
/// stream `noise/trial-i` under `seed`, so the result does not depend on
/// thread scheduling.
pub fn monte_carlo_pe<E: Experiment + ?Sized>(experiment: &E, trials: u64, seed: u64) -> PeEstimate {
    let errors: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_stream(seed, "noise", i);
            u64::from(experiment.trial(&mut rng))
        })
        .sum();
    PeEstimate {
        errors,
        trials,
        pe: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
        ci95: wilson_interval(errors, trials),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn never_failing_experiment() {
        let est = monte_carlo_pe(&|_: &mut StreamRng| false, 1000, 1);
        assert_eq!(est.errors, 0);
        assert_eq!(est.pe, 0.0);
        assert!(est.ci95.1 < 0.004);
    }

    #[test]
    fn reproducible_and_calibrated() {
        let coin = |rng: &mut StreamRng| rng.random_bool(0.25);
        let a = monte_carlo_pe(&coin, 20_000, 9);
        let b = monte_carlo_pe(&coin, 20_000, 9);
        assert_eq!(a, b);
        assert!(a.ci95.0 < 0.25 && 0.25 < a.ci95.1, "{a:?}");
    }

    #[test]
    fn wilson_edges() {
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
        let (lo, hi) = wilson_interval(10, 10);
        assert!(lo > 0.6 && hi > 1.0 - 1e-12);
    }
}

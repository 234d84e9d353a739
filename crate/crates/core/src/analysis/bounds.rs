use num_rational::Ratio;
use num_traits::One;

use super::AnalysisError;

/// All closed-form degrees-of-freedom bounds for one `(M, J1, J2)`.
///
/// `d_*` refer to the compound wiretap channel (one common secret message),
/// `ds_*` to the sum over both messages of the private broadcast channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofBounds {
    pub m: u32,
    pub j1: u32,
    pub j2: u32,
    /// Achievable with interference alignment.
    pub d_l: Ratio<i64>,
    /// Achievable with time-sharing and noise transmission.
    pub d_ts: Ratio<i64>,
    /// Upper bound.
    pub d_u: Ratio<i64>,
    pub ds_l: Ratio<i64>,
    pub ds_u: Ratio<i64>,
}

pub fn dof_bounds(m: u32, j1: u32, j2: u32) -> DofBounds {
    assert!(m >= 1 && j1 >= 1 && j2 >= 1, "M, J1 and J2 must be positive");
    let mi = i64::from(m);
    let lo = j1.min(j2);
    let hi = j1.max(j2);
    let r = |n: i64, d: i64| Ratio::new(n, d);
    let one = Ratio::one();
    let two = Ratio::from_integer(2);

    let (d_l, d_ts, d_u) = if lo < m {
        (one, one, one)
    } else {
        (
            r(mi - 1, mi),
            r(mi - 1, i64::from(lo)),
            one - r(1, mi * mi - mi + 1),
        )
    };
    let (ds_l, ds_u) = if hi < m {
        (two, two)
    } else if lo < m {
        (r(2 * (mi - 1), mi), r(2 * mi - 1, mi))
    } else {
        (r(2 * (mi - 1), mi + 1), r(2 * (mi - 1), mi))
    };
    DofBounds {
        m,
        j1,
        j2,
        d_l,
        d_ts,
        d_u,
        ds_l,
        ds_u,
    }
}

impl DofBounds {
    pub fn as_f64(r: Ratio<i64>) -> f64 {
        *r.numer() as f64 / *r.denom() as f64
    }

    pub fn ordered(&self) -> bool {
        self.d_ts <= self.d_l && self.d_l <= self.d_u && self.ds_l <= self.ds_u
    }
}

/// `I(x; y_j | z_k)` for Gaussian input `x ~ N(0, P/M I)`:
/// `sum_j 1/2 log2(1 + lambda_j P/M) - 1/2 log2(1 + P/M |g|^2)`, where
/// `lambda_j` are the two non-zero eigenvalues of `[h g]^T [h g]`.
pub fn pairwise_bound_rate(h: &[f64], g: &[f64], p: f64, m: usize) -> Result<f64, AnalysisError> {
    for v in [h, g] {
        if v.len() != m {
            return Err(AnalysisError::LengthMismatch {
                expected: m,
                got: v.len(),
            });
        }
    }
    if !(p.is_finite() && p >= 0.0) {
        return Err(AnalysisError::InvalidPower(p));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let hh = dot(h, h);
    let gg = dot(g, g);
    let hg = dot(h, g);
    let det = hh * gg - hg * hg;
    if det <= 1e-10 * hh * gg {
        return Err(AnalysisError::DegenerateInput);
    }
    let half_tr = 0.5 * (hh + gg);
    let disc = (half_tr * half_tr - det).max(0.0).sqrt();
    let l1 = half_tr + disc;
    // det / l1 avoids cancellation in half_tr - disc
    let l2 = det / l1;
    let snr = p / m as f64;
    let joint = 0.5 * (l1 * snr).ln_1p() / std::f64::consts::LN_2 + 0.5 * (l2 * snr).ln_1p() / std::f64::consts::LN_2;
    let eaves = 0.5 * (gg * snr).ln_1p() / std::f64::consts::LN_2;
    Ok((joint - eaves).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn r(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    #[test]
    fn symmetric_two_antenna_example() {
        let b = dof_bounds(2, 2, 2);
        assert_eq!(b.d_l, r(1, 2));
        assert_eq!(b.d_ts, r(1, 2));
        assert_eq!(b.d_u, r(2, 3));
        assert_eq!(b.ds_l, r(2, 3));
        assert_eq!(b.ds_u, r(1, 1));
    }

    #[test]
    fn regime_examples() {
        let b = dof_bounds(3, 2, 5);
        assert_eq!(b.d_l, r(1, 1));
        assert_eq!(b.d_u, r(1, 1));
        assert_eq!(b.ds_l, r(4, 3));
        assert_eq!(b.ds_u, r(5, 3));
        assert_eq!(dof_bounds(2, 5, 5).d_ts, r(1, 5));
        let b = dof_bounds(4, 1, 3);
        assert_eq!((b.ds_l, b.ds_u), (r(2, 1), r(2, 1)));
    }

    #[test]
    fn ordering_on_grid() {
        for m in 1..=6 {
            for j1 in 1..=8 {
                for j2 in 1..=8 {
                    assert!(dof_bounds(m, j1, j2).ordered(), "{m} {j1} {j2}");
                }
            }
        }
    }

    #[test]
    fn pairwise_orthonormal_example() {
        for p in [0.5, 2.0, 1e3, 1e9] {
            let v = pairwise_bound_rate(&[1.0, 0.0], &[0.0, 1.0], p, 2).unwrap();
            assert_relative_eq!(v, 0.5 * (1.0 + p / 2.0).log2(), max_relative = 1e-12);
        }
        assert_eq!(pairwise_bound_rate(&[1.0, 0.0], &[0.0, 1.0], 0.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn pairwise_matches_log_det() {
        let h = [0.3, -1.2, 0.8];
        let g = [1.1, 0.4, -0.5];
        let p = 37.0;
        let s = p / 3.0;
        let hh: f64 = h.iter().map(|x| x * x).sum();
        let gg: f64 = g.iter().map(|x| x * x).sum();
        let hg: f64 = h.iter().zip(&g).map(|(a, b)| a * b).sum();
        let det = (1.0 + s * hh) * (1.0 + s * gg) - s * s * hg * hg;
        let want = 0.5 * det.log2() - 0.5 * (1.0 + s * gg).log2();
        assert_relative_eq!(pairwise_bound_rate(&h, &g, p, 3).unwrap(), want, max_relative = 1e-12);
    }

    #[test]
    fn pairwise_rejects_parallel() {
        assert_eq!(
            pairwise_bound_rate(&[1.0, 2.0], &[2.0, 4.0], 10.0, 2),
            Err(AnalysisError::DegenerateInput)
        );
        assert!(pairwise_bound_rate(&[1.0], &[1.0, 0.0], 1.0, 2).is_err());
    }
}

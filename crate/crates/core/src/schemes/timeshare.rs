use nalgebra::DMatrix;
use num_rational::Ratio;

use super::{best_direction, half_log1p, precondition, SchemeError, SchemeOptions, SchemeReport};
use crate::analysis::half_log_power;
use crate::channel::{dot, null_space_of_rows, CompoundChannel};

/// Field size of the erasure code: the Mersenne prime `2^31 - 1`.
pub const FIELD_PRIME: u64 = (1 << 31) - 1;

/// `C(n, k)`, or `None` if it overflows `u128`.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by i + 1 at every step
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order, reusing a
/// single buffer.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(pos) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[pos] += 1;
        for i in pos + 1..k {
            idx[i] = idx[i - 1] + 1;
        }
    }
}

/// `C(J-1, M-2) / C(J, M-1)`, the fraction of subsets of size `M - 1` that
/// contain a given receiver.
pub fn timeshare_dof(m: u32, j: u32) -> Result<Ratio<i64>, SchemeError> {
    let (m, j) = (u64::from(m), u64::from(j));
    if m == 0 || j == 0 {
        return Err(precondition("timeshare", "M and J must be positive"));
    }
    let total = binomial(j, m - 1);
    let member = if m >= 2 { binomial(j - 1, m - 2) } else { Some(0) };
    let overflow = |c: Option<u128>| {
        c.filter(|&v| v <= i64::MAX as u128)
            .map(|v| v as i64)
            .ok_or(SchemeError::CombinatorialOverflow {
                count: c.unwrap_or(u128::MAX),
                cap: i64::MAX as u64,
            })
    };
    let (member, total) = (overflow(member)?, overflow(total)?);
    if total == 0 {
        return Err(precondition("timeshare", format!("no subsets of size {} among {j}", m - 1)));
    }
    Ok(Ratio::new(member, total))
}

/// Subsets of `M - 1` receivers served one after another, with a `(T, T0)`
/// erasure code spreading the message over the subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticastPlan {
    pub subsets: Vec<Vec<usize>>,
    /// Signal beam of every subset: `u_t` for the multicast plan, the
    /// null-space vector `b_t` for the eavesdropper plan.
    pub beams: Vec<Vec<f64>>,
    /// Noise beam `a_t` of every subset; empty for the eavesdropper plan.
    pub noise: Vec<Vec<f64>>,
    /// Number of subsets.
    pub t: usize,
    /// Number of subsets containing any one receiver.
    pub t0: usize,
}

impl MulticastPlan {
    /// How many subsets contain each of `receivers` receivers.
    pub fn memberships(&self, receivers: usize) -> Vec<usize> {
        let mut count = vec![0; receivers];
        for s in &self.subsets {
            for &i in s {
                count[i] += 1;
            }
        }
        count
    }

    pub fn erasure_code(&self) -> Result<ErasureCode, SchemeError> {
        ErasureCode::new(self.t, self.t0)
    }
}

fn check_regime(channel: &CompoundChannel, scheme: &'static str, group: usize, cap: u64) -> Result<(), SchemeError> {
    let (m, j1, j2) = (channel.antennas(), channel.j1(), channel.j2());
    if m < 2 || j1.min(j2) < m {
        return Err(precondition(
            scheme,
            format!("needs min(J1, J2) >= M >= 2, got J1={j1}, J2={j2}, M={m}"),
        ));
    }
    let count = binomial(group as u64, m as u64 - 1).unwrap_or(u128::MAX);
    if count > u128::from(cap) {
        return Err(SchemeError::CombinatorialOverflow { count, cap });
    }
    Ok(())
}

fn first_row(basis: &DMatrix<f64>) -> Vec<f64> {
    basis.row(0).iter().copied().collect()
}

/// Serves every subset of `M - 1` legitimate receivers with a beam `u_t`
/// they all see and noise along `a_t`, which none of them sees.
pub fn timeshare_multicast_plan(
    channel: &CompoundChannel,
    options: &SchemeOptions,
) -> Result<(MulticastPlan, SchemeReport), SchemeError> {
    check_regime(channel, "timeshare_multicast", channel.j1(), options.cap)?;
    let (m, j1, j2) = (channel.antennas(), channel.j1(), channel.j2());
    let legit: Vec<&[f64]> = channel.legit().iter().map(|h| h.as_slice()).collect();

    let mut subsets = Vec::new();
    for_each_subset(j1, m - 1, |s| subsets.push(s.to_vec()));
    let mut beams = Vec::with_capacity(subsets.len());
    let mut noise = Vec::with_capacity(subsets.len());
    let mut theta = f64::NEG_INFINITY;
    for (t, s) in subsets.iter().enumerate() {
        let rows: Vec<&[f64]> = s.iter().map(|&i| legit[i]).collect();
        let a = first_row(&null_space_of_rows(&rows)?);
        let span = DMatrix::from_fn(rows.len(), m, |r, c| rows[r][c]);
        let u = best_direction(&span, &rows, options.directions, options.seed, &format!("timeshare/u/{t}"));
        let weakest = rows
            .iter()
            .map(|h| 0.5 * dot(h, &u).powi(2).log2())
            .fold(f64::INFINITY, f64::min);
        let exposure = channel
            .eaves()
            .iter()
            .map(|g| half_log1p(g.dot(&u).powi(2) / g.dot(&a).powi(2)))
            .fold(f64::NEG_INFINITY, f64::max);
        theta = theta.max(exposure - weakest);
        beams.push(u);
        noise.push(a);
    }
    let t0 = binomial(j1 as u64 - 1, m as u64 - 2).unwrap_or(0) as usize;
    let plan = MulticastPlan {
        t: subsets.len(),
        t0,
        subsets,
        beams,
        noise,
    };

    let mut report = SchemeReport::new("timeshare_multicast", m, j1, j2, channel.power());
    let fraction = plan.t0 as f64 / plan.t as f64;
    if !theta.is_finite() {
        report
            .warnings
            .push("a subset beam is orthogonal to a receiver or an eavesdropper escapes the noise".into());
    }
    let per_subset = half_log_power(channel.power()) - theta;
    report.rate_bits = if per_subset.is_finite() {
        fraction * per_subset.max(0.0)
    } else {
        0.0
    };
    report.dof_contribution = fraction;
    Ok((plan, report))
}

/// Serves all legitimate receivers along `b_t`, a direction invisible to
/// one subset of `M - 1` eavesdroppers, for every such subset in turn.
pub fn timeshare_eavesdropper_plan(
    channel: &CompoundChannel,
    options: &SchemeOptions,
) -> Result<(MulticastPlan, SchemeReport), SchemeError> {
    check_regime(channel, "timeshare_eaves", channel.j2(), options.cap)?;
    let (m, j1, j2) = (channel.antennas(), channel.j1(), channel.j2());
    let eaves: Vec<&[f64]> = channel.eaves().iter().map(|g| g.as_slice()).collect();

    let mut subsets = Vec::new();
    for_each_subset(j2, m - 1, |s| subsets.push(s.to_vec()));
    let beams = subsets
        .iter()
        .map(|s| {
            let rows: Vec<&[f64]> = s.iter().map(|&k| eaves[k]).collect();
            null_space_of_rows(&rows).map(|b| first_row(&b))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let weakest = beams
        .iter()
        .flat_map(|b| channel.legit().iter().map(move |h| h.dot(b).powi(2)))
        .fold(f64::INFINITY, f64::min);
    let t0 = binomial(j2 as u64 - 1, m as u64 - 2).unwrap_or(0) as usize;
    let plan = MulticastPlan {
        t: subsets.len(),
        t0,
        subsets,
        beams,
        noise: Vec::new(),
    };

    let mut report = SchemeReport::new("timeshare_eaves", m, j1, j2, channel.power());
    if weakest <= 1e-20 {
        report
            .warnings
            .push("a legitimate receiver is orthogonal to a subset beam".into());
    }
    let fraction = plan.t0 as f64 / plan.t as f64;
    report.rate_bits = fraction * half_log1p(weakest * channel.power());
    report.dof_contribution = fraction;
    Ok((plan, report))
}

fn mul_mod(a: u64, b: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(FIELD_PRIME)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64) -> u64 {
    pow_mod(a, FIELD_PRIME - 2)
}

fn sub_mod(a: u64, b: u64) -> u64 {
    (a + FIELD_PRIME - b) % FIELD_PRIME
}

/// Value at `x` of the polynomial of degree `< points.len()` through `points`.
fn interpolate(points: &[(u64, u64)], x: u64) -> u64 {
    points.iter().enumerate().fold(0, |acc, (j, &(xj, yj))| {
        let (num, den) = points
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .fold((1, 1), |(num, den), (_, &(xi, _))| {
                (mul_mod(num, sub_mod(x, xi)), mul_mod(den, sub_mod(xj, xi)))
            });
        (acc + mul_mod(yj, mul_mod(num, inv_mod(den)))) % FIELD_PRIME
    })
}

/// Systematic `(n, k)` Reed-Solomon code over `GF(2^31 - 1)`: symbol `i` is
/// the value at `x = i + 1` of the polynomial through the `k` message symbols
/// placed at `x = 1..k`. Any `k` symbols recover the message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErasureCode {
    pub n: usize,
    pub k: usize,
}

impl ErasureCode {
    pub fn new(n: usize, k: usize) -> Result<Self, SchemeError> {
        if k == 0 || k > n || n as u64 >= FIELD_PRIME {
            return Err(precondition("erasure", format!("invalid code parameters ({n}, {k})")));
        }
        Ok(Self { n, k })
    }

    pub fn encode(&self, message: &[u64]) -> Result<Vec<u64>, SchemeError> {
        if message.len() != self.k || message.iter().any(|&s| s >= FIELD_PRIME) {
            return Err(precondition(
                "erasure",
                format!("message must hold {} field elements", self.k),
            ));
        }
        let points: Vec<(u64, u64)> = message.iter().enumerate().map(|(i, &s)| (i as u64 + 1, s)).collect();
        Ok((0..self.n)
            .map(|i| if i < self.k { message[i] } else { interpolate(&points, i as u64 + 1) })
            .collect())
    }

    /// Recovers the message from `(position, symbol)` pairs; the first `k`
    /// distinct positions are used.
    pub fn decode(&self, received: &[(usize, u64)]) -> Result<Vec<u64>, SchemeError> {
        let mut points: Vec<(u64, u64)> = Vec::with_capacity(self.k);
        for &(pos, sym) in received {
            if pos >= self.n {
                return Err(SchemeError::DecodeFailure(format!("position {pos} out of range")));
            }
            let x = pos as u64 + 1;
            if !points.iter().any(|&(px, _)| px == x) {
                points.push((x, sym % FIELD_PRIME));
            }
            if points.len() == self.k {
                break;
            }
        }
        if points.len() < self.k {
            return Err(SchemeError::DecodeFailure(format!(
                "{} distinct symbols received, {} needed",
                points.len(),
                self.k
            )));
        }
        Ok((1..=self.k as u64).map(|x| interpolate(&points, x)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_compound_channel;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), Some(10));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(60, 30), Some(118264581564861424));
        assert_eq!(binomial(10, 0), Some(1));
    }

    #[test]
    fn subsets_are_lexicographic() {
        let mut all = Vec::new();
        for_each_subset(4, 2, |s| all.push(s.to_vec()));
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        let mut empty = 0;
        for_each_subset(3, 0, |s| {
            assert!(s.is_empty());
            empty += 1;
        });
        assert_eq!(empty, 1);
    }

    #[test]
    fn dof_closed_form() {
        assert_eq!(timeshare_dof(2, 3).unwrap(), Ratio::new(1, 3));
        assert_eq!(timeshare_dof(3, 4).unwrap(), Ratio::new(1, 2));
        for m in 2..=6u32 {
            for j in m..=20 {
                assert_eq!(timeshare_dof(m, j).unwrap(), Ratio::new(i64::from(m) - 1, i64::from(j)));
            }
        }
    }

    #[test]
    fn multicast_plan_examples() {
        let opts = SchemeOptions {
            directions: 500,
            ..SchemeOptions::default()
        };
        let ch = sample_compound_channel(2, 3, 3, 2).with_power(1e6).unwrap();
        let (plan, report) = timeshare_multicast_plan(&ch, &opts).unwrap();
        assert_eq!((plan.t, plan.t0), (3, 1));
        assert_eq!(plan.memberships(3), vec![1; 3]);
        assert_eq!(report.dof_contribution, 1.0 / 3.0);
        for (s, a) in plan.subsets.iter().zip(&plan.noise) {
            for &i in s {
                assert!(ch.legit()[i].dot(a).abs() < 1e-10);
            }
        }
        let ch = sample_compound_channel(3, 4, 3, 2);
        let (plan, report) = timeshare_multicast_plan(&ch, &opts).unwrap();
        assert_eq!((plan.t, plan.t0), (6, 3));
        assert_eq!(plan.memberships(4), vec![3; 4]);
        assert_eq!(report.dof_contribution, 0.5);
    }

    #[test]
    fn eavesdropper_plan_examples() {
        let ch = sample_compound_channel(2, 3, 3, 4);
        let (plan, report) = timeshare_eavesdropper_plan(&ch, &SchemeOptions::default()).unwrap();
        assert_eq!(report.dof_contribution, 1.0 / 3.0);
        assert_eq!(plan.memberships(3), vec![plan.t0; 3]);
        for (s, b) in plan.subsets.iter().zip(&plan.beams) {
            for &k in s {
                assert!(ch.eaves()[k].dot(b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn timeshare_preconditions() {
        let ch = sample_compound_channel(3, 2, 4, 1);
        assert!(timeshare_multicast_plan(&ch, &SchemeOptions::default()).is_err());
        let ch = sample_compound_channel(2, 6, 6, 1);
        let tight = SchemeOptions {
            cap: 3,
            ..SchemeOptions::default()
        };
        assert!(matches!(
            timeshare_eavesdropper_plan(&ch, &tight),
            Err(SchemeError::CombinatorialOverflow { count: 6, cap: 3 })
        ));
    }

    #[test]
    fn erasure_any_k_symbols_decode() {
        for (n, k) in [(3, 1), (6, 3), (5, 2), (4, 4)] {
            let code = ErasureCode::new(n, k).unwrap();
            let msg: Vec<u64> = (0..k as u64).map(|i| (i * 1_234_567 + 89) % FIELD_PRIME).collect();
            let word = code.encode(&msg).unwrap();
            assert_eq!(&word[..k], msg.as_slice());
            for_each_subset(n, k, |pos| {
                let rx: Vec<(usize, u64)> = pos.iter().map(|&p| (p, word[p])).collect();
                assert_eq!(code.decode(&rx).unwrap(), msg);
            });
            if k > 1 {
                assert!(code.decode(&[(0, word[0])]).is_err());
            }
        }
    }
}

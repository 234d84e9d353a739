use super::AlignError;

/// PAM layout: every one of `dims` symbols takes values in `a * {-Q, ..., Q}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PamCode {
    pub a: f64,
    pub q: u32,
    pub dims: usize,
    pub gamma: f64,
}

impl PamCode {
    pub fn points_per_symbol(&self) -> u64 {
        2 * u64::from(self.q) + 1
    }

    /// Integer symbol alphabet `{-Q, ..., Q}`.
    pub fn alphabet(&self) -> impl Iterator<Item = i64> {
        let q = i64::from(self.q);
        -q..=q
    }

    /// `E[b^2]` for a symbol uniform on `a * {-Q, ..., Q}`.
    pub fn symbol_power(&self) -> f64 {
        let q = f64::from(self.q);
        self.a * self.a * q * (q + 1.0) / 3.0
    }

    /// The coarser `a^2 Q^2` bound on `E[b^2]`.
    pub fn symbol_power_bound(&self) -> f64 {
        let q = f64::from(self.q);
        self.a * self.a * q * q
    }

    /// `sum_i alpha_i^2 E[b_i^2]` for the transmit combination `alpha`.
    pub fn average_power(&self, alpha_norm_sq: f64) -> f64 {
        alpha_norm_sq * self.symbol_power()
    }

    /// Bits carried by `dims` uniform symbols.
    pub fn bits(&self) -> f64 {
        self.dims as f64 * (self.points_per_symbol() as f64).log2()
    }
}

/// `Q = max(1, floor(P^{(1-eps)/(2(dims+eps))}))` and `a = gamma sqrt(P) / Q`.
pub fn select_pam_params(p: f64, dims_total: usize, eps: f64, gamma: f64) -> Result<PamCode, AlignError> {
    select_pam_params_split(p, p, dims_total, eps, gamma)
}

/// General form used by the two-message schemes, where the half-range is set
/// from `q_base` (e.g. `P / 2`) and the spacing from the per-stream power
/// `p_eff` (e.g. `P / (2M)`).
pub fn select_pam_params_split(
    q_base: f64,
    p_eff: f64,
    dims_total: usize,
    eps: f64,
    gamma: f64,
) -> Result<PamCode, AlignError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(AlignError::InvalidEpsilon(eps));
    }
    if !(q_base.is_finite() && q_base > 1.0) {
        return Err(AlignError::InvalidPower(q_base));
    }
    if !(p_eff.is_finite() && p_eff > 0.0) {
        return Err(AlignError::InvalidPower(p_eff));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(AlignError::InvalidGamma(gamma));
    }
    if dims_total == 0 {
        return Err(AlignError::ZeroParameter("dims_total"));
    }
    let exponent = (1.0 - eps) / (2.0 * (dims_total as f64 + eps));
    let raw = q_base.powf(exponent);
    // Values like 2.9999999999 are exactly 3 in exact arithmetic.
    let q = ((raw * (1.0 + 1e-12)).floor() as u32).max(1);
    let a = gamma * p_eff.sqrt() / f64::from(q);
    Ok(PamCode {
        a,
        q,
        dims: dims_total,
        gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_near_one_gives_single_level() {
        for p in [2.0, 1e3, 1e12, 1e100] {
            let pam = select_pam_params(p, 3, 1.0 - 1e-9, 1.0).unwrap();
            assert_eq!(pam.q, 1);
        }
    }

    #[test]
    fn closed_form_example() {
        // 2^{20 * 0.8 / (2 * 4.2)} = 2^{1.90476...} = 3.74...
        let pam = select_pam_params(2f64.powi(20), 4, 0.2, 1.0).unwrap();
        assert_eq!(pam.q, 3);
        assert_eq!(pam.a, 1024.0 / 3.0);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(select_pam_params(10.0, 2, 0.0, 1.0), Err(AlignError::InvalidEpsilon(0.0)));
        assert_eq!(select_pam_params(10.0, 2, 1.0, 1.0), Err(AlignError::InvalidEpsilon(1.0)));
        assert!(select_pam_params(1.0, 2, 0.5, 1.0).is_err());
        assert!(select_pam_params(10.0, 0, 0.5, 1.0).is_err());
        assert!(select_pam_params(10.0, 2, 0.5, 0.0).is_err());
    }

    #[test]
    fn power_constraint_holds_on_grid() {
        // x = alpha^T b with ||alpha|| = 1/gamma: exact and coarse power both <= P.
        for &p in &[10.0, 1e3, 2f64.powi(20), 1e9, 2f64.powi(40)] {
            for dims in 1..=8 {
                for &eps in &[0.01, 0.1, 0.5, 0.9] {
                    for &alpha_norm in &[0.3, 1.0, 4.0] {
                        let gamma = 1.0 / alpha_norm;
                        let pam = select_pam_params(p, dims, eps, gamma).unwrap();
                        let exact = pam.average_power(alpha_norm * alpha_norm);
                        let coarse = alpha_norm * alpha_norm * pam.symbol_power_bound();
                        assert!(exact <= coarse * (1.0 + 1e-12));
                        assert!(coarse <= p * (1.0 + 1e-12), "P={p} dims={dims} eps={eps}");
                    }
                }
            }
        }
    }
}

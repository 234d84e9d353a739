use super::AnalysisError;

/// `1/2 log2 P`, the rate scale against which degrees of freedom are measured.
pub fn half_log_power(p: f64) -> f64 {
    0.5 * p.log2()
}

/// Least-squares slope of `rate` against `1/2 log2 P`, fitted on the upper
/// half of the points sorted by `P`.
pub fn dof_slope(points: &[(f64, f64)]) -> Result<f64, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::InsufficientSpan(format!("{} points", points.len())));
    }
    if points.iter().any(|&(p, r)| !(p.is_finite() && p > 0.0 && r.is_finite())) {
        return Err(AnalysisError::InsufficientSpan("non-finite or non-positive entry".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lo, hi) = (sorted[0].0, sorted[sorted.len() - 1].0);
    if hi / lo < 100.0 {
        return Err(AnalysisError::InsufficientSpan(format!("P spans {lo}..{hi}")));
    }
    let top = &sorted[sorted.len() / 2..];
    let n = top.len() as f64;
    let xs: Vec<f64> = top.iter().map(|&(p, _)| half_log_power(p)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = top.iter().map(|&(_, r)| r).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(top).map(|(x, &(_, r))| (x - mx) * (r - my)).sum();
    if sxx <= 0.0 {
        return Err(AnalysisError::InsufficientSpan("upper half has a single distinct P".into()));
    }
    Ok(sxy / sxx)
}

//! Kolmogorov–Smirnov discrepancy against a continuous reference CDF.

/// `sup |F_m - F|` where `cdf_values` are the reference CDF evaluated at the
/// `m` samples (so the reference becomes uniform on `[0, 1]`). Returns 0 for
/// an empty sample.
pub fn ks_uniform(cdf_values: &[f64]) -> f64 {
    let mut u: Vec<f64> = cdf_values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    u.sort_by(f64::total_cmp);
    let m = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &v)| ((i as f64 + 1.0) / m - v).max(v - i as f64 / m))
        .fold(0.0, f64::max)
}

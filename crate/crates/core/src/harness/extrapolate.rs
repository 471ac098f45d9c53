//! Finite-size fit `rate(N) = a + b · log(N) / N`.

use serde::Serialize;

use crate::error::{domain, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extrapolation {
    /// Fitted limit proxy.
    pub intercept: f64,
    pub slope: f64,
    pub max_residual: f64,
    /// `N` values left out because their rate was infinite or NaN.
    pub excluded: Vec<usize>,
}

/// Least-squares fit over the finite points of `(N, rate)`; refuses with
/// fewer than three distinct finite `N`.
pub fn extrapolate_rate(points: &[(usize, f64)]) -> Result<Extrapolation> {
    let excluded: Vec<usize> = points
        .iter()
        .filter(|(_, r)| !r.is_finite())
        .map(|&(n, _)| n)
        .collect();
    let finite: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, r)| r.is_finite() && *n >= 1)
        .map(|&(n, r)| ((n as f64).ln() / n as f64, r))
        .collect();
    let mut distinct: Vec<usize> = points
        .iter()
        .filter(|(_, r)| r.is_finite())
        .map(|&(n, _)| n)
        .collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(domain(format!(
            "extrapolation needs at least 3 distinct N with finite rates, got {}",
            distinct.len()
        )));
    }
    let k = finite.len() as f64;
    let mx = finite.iter().map(|p| p.0).sum::<f64>() / k;
    let my = finite.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = finite.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = finite.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    // x = log N / N takes the same value at N = 2 and N = 4
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let max_residual = finite
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).abs())
        .fold(0.0, f64::max);
    Ok(Extrapolation {
        intercept,
        slope,
        max_residual,
        excluded,
    })
}

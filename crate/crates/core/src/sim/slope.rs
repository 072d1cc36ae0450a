use serde::{Deserialize, Serialize};

use crate::error::{DmtError, Result};

/// Least-squares fit of `log10(outage)` against `log10(snr)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Negated slope.
    pub diversity: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub points: usize,
}

pub const MIN_SLOPE_POINTS: usize = 3;

/// Fits `(snr, outage probability)` pairs, both linear scale. Points with a
/// non-positive probability carry no slope information and are skipped.
pub fn fit_diversity_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(snr, p)| *snr > 0.0 && *p > 0.0)
        .map(|(snr, p)| (snr.log10(), p.log10()))
        .unzip();
    let n = xs.len();
    if n < MIN_SLOPE_POINTS {
        return Err(DmtError::TooFewPoints(n));
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(DmtError::InvalidConfig(
            "slope fit needs at least two distinct SNR values".into(),
        ));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let std_error = (ssr / (n - 2) as f64 / sxx).sqrt();
    Ok(SlopeFit {
        diversity: -slope,
        std_error,
        intercept,
        points: n,
    })
}

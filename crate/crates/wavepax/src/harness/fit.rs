//! Least-squares fits on log-log axes.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// `ln y ≈ slope·ln x + intercept` with the RMS of the residuals in `ln y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: usize,
}

impl Fit {
    /// Whether the slope lies in `[lo, hi]` and the residual is at most `max_residual`.
    pub fn within(&self, lo: f64, hi: f64, max_residual: f64) -> bool {
        self.slope >= lo && self.slope <= hi && self.residual <= max_residual
    }
}

/// Fits a power law through `(x, y)`; needs at least two points with
/// positive, finite coordinates and at least two distinct `x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<Fit> {
    if x.len() != y.len() || x.len() < 2 {
        return invalid("a log-log fit needs at least two (x, y) pairs");
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return invalid("log-log fit data must be positive and finite");
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return invalid("log-log fit needs distinct x values");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum();
    Ok(Fit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        points: lx.len(),
    })
}

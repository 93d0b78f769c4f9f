//! Smooth cutoff functions `Ψ(η)`: `1` for `|η| ≤ ½`, `0` for `|η| ≥ 1`.

use super::grid::Grid;
use crate::error::{Result, WavepaxError};

/// `f(t) = e^{−1/t}` for `t > 0`, else `0`.
#[inline]
fn f(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C^∞ step: `0` for `t ≤ 0`, `1` for `t ≥ 1`, `f(t)/(f(t) + f(1 − t))` between.
#[inline]
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = f(t);
        a / (a + f(1.0 - t))
    }
}

/// Radial profile `Ψ(η) = S(2 − 2|η|)`.
#[inline]
pub fn psi(eta_norm: f64) -> f64 {
    smooth_step(2.0 - 2.0 * eta_norm)
}

/// `Ψ(R^{−1}(k − k₀))` at a single wavevector.
#[inline]
pub fn psi_at(k: &[f64], center: &[f64], radius: f64) -> f64 {
    let r2: f64 = k.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
    psi(r2.sqrt() / radius)
}

/// Samples `Ψ(R^{−1}(k − k₀))` on every node of `grid`. The radius must
/// exceed `2Δk` to be resolved.
pub fn build_cutoff(grid: &Grid, center: &[f64], radius: f64) -> Result<Vec<f64>> {
    if !(radius > 2.0 * grid.dk()) {
        return Err(WavepaxError::RadiusUnresolvable {
            radius,
            dk: grid.dk(),
        });
    }
    if center.len() != grid.d {
        return crate::error::invalid("cutoff center has the wrong dimension");
    }
    let mut k = [0.0; 2];
    Ok((0..grid.len())
        .map(|idx| {
            grid.k_into(idx, &mut k);
            psi_at(&k[..grid.d], center, radius)
        })
        .collect())
}

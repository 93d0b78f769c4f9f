//! Wavepacket envelopes `Φ` and their Fourier transforms `Φ̂`.
//!
//! Conventions: `Φ̂(κ) = ∫ Φ(y) e^{−iy·κ} dy`. The `width` is the κ-scale of
//! `Φ̂`; a packet with scale parameter `β` therefore occupies a k-region of
//! size `β·width`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Envelope family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeFamily {
    /// `Φ(y) = A e^{−σ²|y|²/2}`, `Φ̂(κ) = A(√(2π)/σ)^d e^{−|κ|²/(2σ²)}`.
    Gaussian,
    /// `Φ(y) = A Π_a sech(σ y_a)`, `Φ̂(κ) = A Π_a (π/σ) sech(πκ_a/(2σ))`.
    Sech,
    /// Compactly supported in k: `Φ̂(κ) = A e^{1 − 1/(1 − |κ/σ|²)}` for
    /// `|κ| < σ`; no closed-form `Φ`.
    Bump,
}

/// Envelope with family, κ-width `σ` and amplitude `A` (peak of `|Φ|` for
/// gaussian and sech, peak of `Φ̂` for bump).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub family: EnvelopeFamily,
    pub width: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl Envelope {
    pub fn gaussian(width: f64, amplitude: f64) -> Self {
        Envelope {
            family: EnvelopeFamily::Gaussian,
            width,
            amplitude,
        }
    }

    pub fn sech(width: f64, amplitude: f64) -> Self {
        Envelope {
            family: EnvelopeFamily::Sech,
            width,
            amplitude,
        }
    }

    pub fn bump(width: f64, amplitude: f64) -> Self {
        Envelope {
            family: EnvelopeFamily::Bump,
            width,
            amplitude,
        }
    }

    /// `Φ̂(κ)`.
    pub fn hat(&self, kappa: &[f64]) -> f64 {
        let s = self.width;
        let a = self.amplitude;
        match self.family {
            EnvelopeFamily::Gaussian => {
                let d = kappa.len() as i32;
                let q: f64 = kappa.iter().map(|x| x * x).sum();
                a * ((2.0 * PI).sqrt() / s).powi(d) * (-q / (2.0 * s * s)).exp()
            }
            EnvelopeFamily::Sech => kappa
                .iter()
                .fold(a, |acc, &x| acc * (PI / s) / (PI * x / (2.0 * s)).cosh()),
            EnvelopeFamily::Bump => {
                let q: f64 = kappa.iter().map(|x| x * x).sum::<f64>() / (s * s);
                if q >= 1.0 {
                    0.0
                } else {
                    a * (1.0 - 1.0 / (1.0 - q)).exp()
                }
            }
        }
    }

    /// `Φ(y)` where a closed form exists.
    pub fn profile(&self, y: &[f64]) -> Option<f64> {
        let s = self.width;
        match self.family {
            EnvelopeFamily::Gaussian => {
                let q: f64 = y.iter().map(|x| x * x).sum();
                Some(self.amplitude * (-0.5 * s * s * q).exp())
            }
            EnvelopeFamily::Sech => Some(
                y.iter()
                    .fold(self.amplitude, |acc, &x| acc / (s * x).cosh()),
            ),
            EnvelopeFamily::Bump => None,
        }
    }

    /// Closed-form `‖Φ̂‖_{L¹}` where available.
    pub fn hat_l1(&self, d: usize) -> Option<f64> {
        let a = self.amplitude.abs();
        match self.family {
            // ∫ e^{−κ²/(2σ²)} dκ = (√(2π)σ)^d
            EnvelopeFamily::Gaussian => Some(a * (2.0 * PI).powi(d as i32)),
            // ∫ (π/σ) sech(πκ/(2σ)) dκ = π²·... per axis: (π/σ)(2σ/π)π = 2π
            EnvelopeFamily::Sech => Some(a * (2.0 * PI).powi(d as i32)),
            EnvelopeFamily::Bump => None,
        }
    }

    /// Closed-form `‖∇Φ̂‖_{L¹}` (gaussian only).
    pub fn grad_hat_l1(&self, d: usize) -> Option<f64> {
        let a = self.amplitude.abs();
        let s = self.width;
        match (self.family, d) {
            // 1D: ∫|Φ̂′| = 2 Φ̂(0)
            (EnvelopeFamily::Gaussian, 1) => Some(2.0 * a * (2.0 * PI).sqrt() / s),
            (EnvelopeFamily::Sech, 1) => Some(2.0 * a * PI / s),
            // 2D gaussian: ∫|κ|/σ² Φ̂ dκ = Φ̂(0)/σ²·2π·∫ r² e^{−r²/2σ²} dr = Φ̂(0)·2π·σ·√(π/2)
            (EnvelopeFamily::Gaussian, 2) => {
                Some(a * (2.0 * PI / (s * s)) * 2.0 * PI * s * (PI / 2.0).sqrt())
            }
            _ => None,
        }
    }

    /// Closed-form `‖Φ̂‖_{L^{1,2}}` with weight `(1+|κ|)²` (1D gaussian).
    pub fn hat_l1_weighted2(&self, d: usize) -> Option<f64> {
        if self.family != EnvelopeFamily::Gaussian || d != 1 {
            return None;
        }
        // ∫(1 + 2|κ| + κ²)Φ̂ = Φ̂(0)[√(2π)σ + 4σ² + √(2π)σ³]
        let p0 = self.amplitude.abs() * (2.0 * PI).sqrt() / self.width;
        let s = self.width;
        Some(p0 * ((2.0 * PI).sqrt() * s + 4.0 * s * s + (2.0 * PI).sqrt() * s.powi(3)))
    }
}

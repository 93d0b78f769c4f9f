//! Empirical probe of the genericity of universal resonance invariance.

use super::classify::{classify, Classification};
use super::enumerate::ResonanceOptions;
use super::spectrum::{NkPair, NkSpectrum};
use crate::dispersion::DispersionModel;
use crate::error::{invalid, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Outcome of [`genericity_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub trials: usize,
    pub universal: usize,
    /// Trials whose classification failed (e.g. a perturbed wavevector hit
    /// the band-crossing set); counted as not universal.
    pub failures: usize,
    pub fraction: f64,
}

/// Uniform sample from the ball of radius `r` in `d ≤ 2` dimensions.
fn ball_sample(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    if r == 0.0 {
        return vec![0.0; d];
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-r..=r)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() <= r * r {
            return v;
        }
    }
}

/// Draws `trials` independent uniform perturbations of every `k_{*l}` of the
/// template within `radius`, classifies each perturbed spectrum and returns
/// the fraction found universally invariant. Deterministic under `seed`.
pub fn genericity_probe(
    template: &NkSpectrum,
    model: &DispersionModel,
    opts: &ResonanceOptions,
    trials: usize,
    radius: f64,
    seed: u64,
) -> Result<ProbeResult> {
    if !(radius >= 0.0) || trials == 0 {
        return invalid("probe needs radius ≥ 0 and at least one trial");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut universal = 0;
    let mut failures = 0;
    for _ in 0..trials {
        let pairs: Vec<NkPair> = template
            .pairs
            .iter()
            .map(|p| {
                let o = ball_sample(&mut rng, p.k.len(), radius);
                NkPair::new(p.n, p.k.iter().zip(&o).map(|(a, b)| a + b).collect())
            })
            .collect();
        let report = NkSpectrum::new(pairs).and_then(|s| classify(&s, model, opts));
        match report {
            Ok(r) if r.classification == Classification::UniversallyInvariant => universal += 1,
            Ok(_) => {}
            Err(_) => failures += 1,
        }
    }
    Ok(ProbeResult {
        trials,
        universal,
        failures,
        fraction: universal as f64 / trials as f64,
    })
}

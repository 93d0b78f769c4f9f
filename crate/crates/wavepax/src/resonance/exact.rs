//! Exact rational verification of resonance conditions for closed-form
//! scalar bands.
//!
//! Every finite double is a dyadic rational, so for bands that are
//! polynomial in `k` (quadratic, integer-power in 1D or even power in any
//! dimension, linear in 1D) the resonance residual can be evaluated without
//! rounding. This settles knife-edge cases such as `2ω(k_*) = ω(2k_*)`
//! exactly rather than up to a floating tolerance.

use super::enumerate::ResonanceSolution;
use super::spectrum::{kappa, NkSpectrum};
use crate::dispersion::{DispersionModel, ModelKind, ScalarBand};
use crate::sign::Sign;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

fn rat(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Exact value of a closed-form band at a rational wavevector.
pub fn exact_band_value(band: &ScalarBand, k: &[BigRational]) -> Option<BigRational> {
    let sq: BigRational = k
        .iter()
        .map(|x| x * x)
        .fold(BigRational::zero(), |a, b| a + b);
    match band {
        ScalarBand::Quadratic { a2, a0 } => Some(rat(*a2)? * sq + rat(*a0)?),
        ScalarBand::Power { p, a0 } => {
            if p.fract() != 0.0 || *p < 0.0 || *p > 64.0 {
                return None;
            }
            let p = *p as i32;
            let base = if k.len() == 1 {
                num_traits::pow::pow(k[0].abs(), p as usize)
            } else if p % 2 == 0 {
                num_traits::pow::pow(sq, (p / 2) as usize)
            } else {
                return None;
            };
            Some(base + rat(*a0)?)
        }
        ScalarBand::Linear { c, a0 } => {
            if k.len() != 1 {
                return None;
            }
            Some(rat(*c)? * k[0].abs() + rat(*a0)?)
        }
        ScalarBand::Custom(_) => None,
    }
}

/// Exact `ω_{n,ζ}(k) = ζ·ω_n(ζk)` with the bands sorted pointwise.
pub fn exact_omega(
    model: &DispersionModel,
    n: usize,
    zeta: Sign,
    k: &[BigRational],
) -> Option<BigRational> {
    let ModelKind::Scalar(bands) = &model.kind else {
        return None;
    };
    let zk: Vec<BigRational> = k
        .iter()
        .map(|x| {
            if zeta == Sign::Plus {
                x.clone()
            } else {
                -x.clone()
            }
        })
        .collect();
    let mut vals: Vec<BigRational> = bands
        .iter()
        .map(|b| exact_band_value(b, &zk))
        .collect::<Option<_>>()?;
    vals.sort();
    let v = vals.get(n - 1)?.clone();
    Some(if zeta == Sign::Plus { v } else { -v })
}

/// Exact residual `−ω_{n,ζ}(κ) + Σ_j ω_{n_{l_j},ζ_j}(ζ_j k_{*l_j})` of a
/// solution, or `None` when the model is not exactly evaluable.
pub fn exact_residual(
    sol: &ResonanceSolution,
    spectrum: &NkSpectrum,
    model: &DispersionModel,
) -> Option<BigRational> {
    let kap: Vec<BigRational> = {
        // κ accumulated in exact arithmetic
        let mut acc = vec![BigRational::zero(); spectrum.dim()];
        for &(z, l) in &sol.index.entries {
            for (a, x) in spectrum.pair(l).k.iter().enumerate() {
                let r = rat(*x)?;
                acc[a] = if z == Sign::Plus {
                    &acc[a] + r
                } else {
                    &acc[a] - r
                };
            }
        }
        acc
    };
    debug_assert_eq!(kap.len(), kappa(&sol.index, spectrum).len());
    let mut total = -exact_omega(model, sol.n, sol.zeta, &kap)?;
    for &(z, l) in &sol.index.entries {
        let p = spectrum.pair(l);
        let zk: Vec<BigRational> =
            p.k.iter()
                .map(|x| rat(*x).map(|r| if z == Sign::Plus { r } else { -r }))
                .collect::<Option<_>>()?;
        total += exact_omega(model, p.n, z, &zk)?;
    }
    Some(total)
}

/// Whether the residual of `sol` vanishes exactly (`None` when unavailable).
pub fn exact_residual_is_zero(
    sol: &ResonanceSolution,
    spectrum: &NkSpectrum,
    model: &DispersionModel,
) -> Option<bool> {
    exact_residual(sol, spectrum, model).map(|r| r.is_zero())
}

/// Exact evaluation of a condition `Σ_l b_l ω_{n_l}(k_{*l})`.
pub fn exact_condition(
    b: &[i64],
    spectrum: &NkSpectrum,
    model: &DispersionModel,
) -> Option<BigRational> {
    let mut total = BigRational::zero();
    for (l, &bl) in b.iter().enumerate() {
        let p = &spectrum.pairs[l];
        let k: Vec<BigRational> = p.k.iter().map(|x| rat(*x)).collect::<Option<_>>()?;
        let w = exact_omega(model, p.n, Sign::Plus, &k)?;
        total += w * BigRational::from_integer(bl.into());
    }
    Some(total)
}

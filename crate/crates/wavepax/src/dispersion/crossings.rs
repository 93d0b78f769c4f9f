//! Band-crossing detection and neighbourhood bounds of the band functions.

use super::model::{sym_opnorm, DispersionModel, ModelKind};
use crate::error::{Result, WavepaxError};
use crate::resonance::NkSpectrum;
use crate::sign::Sign;
use crate::wavepacket::Grid;
use serde::{Deserialize, Serialize};

/// `π₀` and the derivative bounds of the bands over the `π₀`-balls around
/// `±k_{*l}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandNeighborhoodBounds {
    pub pi0: f64,
    pub c_omega1: f64,
    pub c_omega2: f64,
}

/// Golden-section minimisation of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for a root of `f` on `[a, b]` with `f(a)·f(b) < 0`.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Real function of a wavevector borrowed from a model.
type BandFn<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;

/// Nodes of `grid` that are band-crossing points of `model`: nodes whose
/// eigen-gap (including `|ω_{1,±}|`) is below the calibrated tolerance, whose
/// spectrum is misordered or whose symbol fails to evaluate, plus the nodes
/// nearest to crossings located between nodes (root finding on pairwise band
/// differences for scalar models, golden-section refinement of local gap
/// minima for all models). The result is sorted.
pub fn detect_band_crossings(model: &DispersionModel, grid: &Grid) -> Vec<usize> {
    let model = model.calibrated(grid);
    let tol = model.tol.gap;
    let len = grid.len();
    let gap_at = |k: &[f64]| -> f64 {
        match model.eigen_raw(k) {
            Ok(e) if !e.misordered => e.min_gap,
            _ => 0.0,
        }
    };
    let mut flagged = vec![false; len];
    let gaps: Vec<f64> = (0..len).map(|idx| gap_at(&grid.k_at(idx))).collect();
    for idx in 0..len {
        if !(gaps[idx] >= tol) {
            flagged[idx] = true;
        }
    }
    let n = grid.n;
    for axis in 0..grid.d {
        for idx in 0..len {
            let m = grid.multi(idx);
            if m[axis] == 0 || m[axis] + 1 >= n {
                continue;
            }
            let mut mm = m;
            mm[axis] -= 1;
            let prev = grid.flat(mm);
            mm[axis] += 2;
            let next = grid.flat(mm);
            let k0 = grid.k_at(idx);
            let along = |t: f64| -> Vec<f64> {
                let mut k = k0.clone();
                k[axis] += t;
                k
            };
            let dk = grid.dk();
            // local minimum of the gap along this axis
            if gaps[idx] <= gaps[prev] && gaps[idx] <= gaps[next] && gaps[idx] < f64::INFINITY {
                let (t, g) = golden_min(|t| gap_at(&along(t)), -dk, dk, 60);
                if g < tol {
                    if let Some(j) = grid.nearest_index(&along(t)) {
                        flagged[j] = true;
                    }
                }
            }
            // sign changes of pairwise band differences / lowest bands
            if let ModelKind::Scalar(bands) = &model.kind {
                let mut funcs: Vec<BandFn<'_>> = Vec::new();
                for s in [1.0, -1.0] {
                    for (i, bi) in bands.iter().enumerate() {
                        funcs.push(Box::new(move |k: &[f64]| {
                            let kk: Vec<f64> = k.iter().map(|x| s * x).collect();
                            bi.value(&kk)
                        }));
                        for bj in bands.iter().skip(i + 1) {
                            funcs.push(Box::new(move |k: &[f64]| {
                                let kk: Vec<f64> = k.iter().map(|x| s * x).collect();
                                bi.value(&kk) - bj.value(&kk)
                            }));
                        }
                    }
                }
                for f in &funcs {
                    let (a, b) = (f(&k0), f(&along(dk)));
                    if a * b < 0.0 {
                        let t = bisect(|t| f(&along(t)), 0.0, dk);
                        if let Some(j) = grid.nearest_index(&along(t)) {
                            flagged[j] = true;
                        }
                    }
                }
            }
        }
    }
    (0..len).filter(|&i| flagged[i]).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `π₀ = ½·min(dist(±k_{*l}, flagged set), 1)` (`½` when nothing is flagged)
/// together with the largest `|∇ω|` and `|∇²ω|` over the `π₀`-balls around
/// `±k_{*l}`, estimated by dense sampling.
pub fn neighborhood_bounds(
    model: &DispersionModel,
    spectrum: &NkSpectrum,
    grid: &Grid,
) -> Result<BandNeighborhoodBounds> {
    let model = model.calibrated(grid);
    let flagged = detect_band_crossings(&model, grid);
    let flagged_k: Vec<Vec<f64>> = flagged.iter().map(|&i| grid.k_at(i)).collect();
    let mut min_dist = f64::INFINITY;
    for (l, pair) in spectrum.pairs.iter().enumerate() {
        for zeta in Sign::BOTH {
            let zk: Vec<f64> = pair.k.iter().map(|x| zeta.f() * x).collect();
            if model.is_band_crossing(&zk) {
                return Err(WavepaxError::SpectrumOnSingularSet {
                    index: l + 1,
                    k: zk,
                });
            }
            for fk in &flagged_k {
                let dd = dist(&zk, fk);
                if dd < model.tol.gap {
                    return Err(WavepaxError::SpectrumOnSingularSet {
                        index: l + 1,
                        k: zk,
                    });
                }
                min_dist = min_dist.min(dd);
            }
        }
    }
    let pi0 = if min_dist.is_finite() {
        0.5 * min_dist.min(1.0)
    } else {
        0.5
    };
    let mut offsets: Vec<Vec<f64>> = Vec::new();
    if model.d == 1 {
        let m = 400;
        for i in 0..=m {
            offsets.push(vec![pi0 * (2.0 * i as f64 / m as f64 - 1.0)]);
        }
    } else {
        let m = 40;
        for i in 0..=m {
            for j in 0..=m {
                let o = vec![
                    pi0 * (2.0 * i as f64 / m as f64 - 1.0),
                    pi0 * (2.0 * j as f64 / m as f64 - 1.0),
                ];
                if o[0] * o[0] + o[1] * o[1] <= pi0 * pi0 * (1.0 + 1e-12) {
                    offsets.push(o);
                }
            }
        }
    }
    let (mut c1, mut c2) = (0.0f64, 0.0f64);
    for pair in &spectrum.pairs {
        for zeta in Sign::BOTH {
            for o in &offsets {
                let k: Vec<f64> = pair
                    .k
                    .iter()
                    .zip(o)
                    .map(|(x, y)| zeta.f() * x + y)
                    .collect();
                if let Ok(g) = model.group_velocity(pair.n, zeta, &k) {
                    c1 = c1.max(g.iter().map(|v| v * v).sum::<f64>().sqrt());
                }
                if let Ok(h) = model.hessian(pair.n, zeta, &k) {
                    c2 = c2.max(sym_opnorm(&h, model.d));
                }
            }
        }
    }
    Ok(BandNeighborhoodBounds {
        pi0,
        c_omega1: c1,
        c_omega2: c2,
    })
}

//! Position detection `a(r′, ĥ) = ‖∇_k(e^{ir′·k}ĥ)‖_{L¹}`, position recovery
//! and particle norms.
//!
//! The phase factor is expanded analytically,
//! `∇_k(e^{ir′·k}ĥ) = e^{ir′·k}(ir′ĥ + ∇_kĥ)`, so only `∇_kĥ` is discretized
//! and probing at large `|r′|` never differences a fast phase.

use super::fft::GridTransform;
use super::field::ModalField;
use super::grid::Grid;
use crate::error::{Result, WavepaxError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// How `∇_kĥ` is discretized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Second-order central differences with periodic wrap.
    #[default]
    CentralDifference,
    /// Exact on the grid: `∇_kĥ = F[−ir h(r)]` via the dual r-grid.
    Spectral,
}

/// Precomputed `ĥ` and `∇_kĥ` of a field for fast evaluation of `a(r′)`.
#[derive(Clone, Debug)]
pub struct DetectionField {
    grid: Grid,
    ncomp: usize,
    values: Vec<Complex64>,
    /// `grad[a]` is the components-major derivative along axis `a`.
    grad: Vec<Vec<Complex64>>,
}

impl DetectionField {
    /// Prepares all components of `field`.
    pub fn new(field: &ModalField, mode: GradientMode) -> Self {
        Self::from_data(&field.grid, field.ncomp, &field.data, mode)
    }

    /// Prepares raw components-major data.
    pub fn from_data(grid: &Grid, ncomp: usize, data: &[Complex64], mode: GradientMode) -> Self {
        let len = grid.len();
        let d = grid.d;
        let grad = match mode {
            GradientMode::CentralDifference => {
                let inv = 0.5 / grid.dk();
                (0..d)
                    .map(|a| {
                        let mut g = vec![Complex64::new(0.0, 0.0); ncomp * len];
                        for idx in 0..len {
                            let m = grid.multi(idx);
                            let mut up = m;
                            let mut dn = m;
                            up[a] = (m[a] + 1) % grid.n;
                            dn[a] = (m[a] + grid.n - 1) % grid.n;
                            let (iu, id) = (grid.flat(up), grid.flat(dn));
                            for c in 0..ncomp {
                                g[c * len + idx] = (data[c * len + iu] - data[c * len + id]) * inv;
                            }
                        }
                        g
                    })
                    .collect()
            }
            GradientMode::Spectral => {
                let mut t = GridTransform::new(grid);
                let mut h = data.to_vec();
                for c in 0..ncomp {
                    t.to_r(&mut h[c * len..(c + 1) * len]);
                }
                (0..d)
                    .map(|a| {
                        let mut g = vec![Complex64::new(0.0, 0.0); ncomp * len];
                        for p in 0..len {
                            let r = grid.r_axis(grid.multi(p)[a]);
                            for c in 0..ncomp {
                                g[c * len + p] = Complex64::new(0.0, -r) * h[c * len + p];
                            }
                        }
                        for c in 0..ncomp {
                            t.to_k(&mut g[c * len..(c + 1) * len]);
                        }
                        g
                    })
                    .collect()
            }
        };
        DetectionField {
            grid: grid.clone(),
            ncomp,
            values: data.to_vec(),
            grad,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `a(r′) = Σ_k |ir′ĥ(k) + ∇_kĥ(k)| Δk^d`.
    pub fn eval(&self, r: &[f64]) -> f64 {
        let len = self.grid.len();
        let d = self.grid.d;
        let mut s = 0.0;
        for idx in 0..len {
            let mut p = 0.0;
            for c in 0..self.ncomp {
                let v = self.values[c * len + idx];
                for a in 0..d {
                    let w = Complex64::new(-r[a] * v.im, r[a] * v.re) + self.grad[a][c * len + idx];
                    p += w.norm_sqr();
                }
            }
            s += p.sqrt();
        }
        s * self.grid.weight()
    }

    /// `‖ĥ‖_{L¹}`, the slope of `a(r′)` at large `|r′|`.
    pub fn mass(&self) -> f64 {
        super::field::l1_of(&self.values, self.ncomp, &self.grid)
    }
}

/// `a(r′, ĥ)` for a single probe.
pub fn position_detection(field: &ModalField, r: &[f64], mode: GradientMode) -> f64 {
    DetectionField::new(field, mode).eval(r)
}

/// Axis-aligned search region for [`locate_position`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Coarse-scan step (typically `β^{−1}/4`).
    pub step: f64,
}

impl SearchBox {
    /// Box `center ± half_width` with the given step.
    pub fn around(center: &[f64], half_width: f64, step: f64) -> Self {
        SearchBox {
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
            step,
        }
    }
}

/// Result of [`locate_position`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionEstimate {
    /// Minimizer `r̂` of `a(·)`.
    pub r_hat: Vec<f64>,
    /// `a(r̂)`.
    pub a_min: f64,
    /// Diameter of `{a ≤ threshold}`.
    pub diameter: f64,
    pub threshold: f64,
    /// Whether the sublevel set reaches the search-box boundary (the
    /// diameter is then a lower bound).
    pub touches_boundary: bool,
}

impl PositionEstimate {
    /// Fails with `SublevelSetSplit` when the diameter exceeds `limit`
    /// (the field is not a single particle-like packet).
    pub fn require_localized(&self, limit: f64) -> Result<&Self> {
        if self.diameter > limit || self.touches_boundary {
            return Err(WavepaxError::SublevelSetSplit(format!(
                "sublevel-set diameter {:.4e} exceeds {:.4e}{}",
                self.diameter,
                limit,
                if self.touches_boundary {
                    " (reaches the search boundary)"
                } else {
                    ""
                }
            )));
        }
        Ok(self)
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden_1d(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64, tol: f64) -> f64 {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Locates the minimizer of `a(·)` inside `search` and measures the
/// sublevel set `{a ≤ threshold}`.
///
/// A coarse scan with the box step is followed by golden-section refinement
/// per axis; `a` is convex, so the sublevel set is convex and its extent is
/// found by bisection along rays from `r̂` (both directions in 1D, 32
/// directions in 2D).
pub fn locate_position(
    det: &DetectionField,
    threshold: f64,
    search: &SearchBox,
) -> Result<PositionEstimate> {
    let d = det.grid.d;
    if search.lo.len() != d || search.hi.len() != d || !(search.step > 0.0) {
        return crate::error::invalid("search box does not match the grid dimension");
    }
    // coarse scan (at most 512 points per axis)
    let counts: Vec<usize> = (0..d)
        .map(|a| (((search.hi[a] - search.lo[a]) / search.step).ceil() as usize + 1).clamp(2, 512))
        .collect();
    let coord = |a: usize, i: usize| {
        search.lo[a] + (search.hi[a] - search.lo[a]) * i as f64 / (counts[a] - 1) as f64
    };
    let mut best = (f64::INFINITY, vec![0.0; d]);
    let total: usize = counts.iter().product();
    for flat in 0..total {
        let r: Vec<f64> = if d == 1 {
            vec![coord(0, flat)]
        } else {
            vec![coord(0, flat / counts[1]), coord(1, flat % counts[1])]
        };
        let v = det.eval(&r);
        if v < best.0 {
            best = (v, r);
        }
    }
    // golden-section refinement, coordinate-wise
    let mut r = best.1;
    let h: Vec<f64> = (0..d)
        .map(|a| (search.hi[a] - search.lo[a]) / (counts[a] - 1) as f64)
        .collect();
    let tol = 1e-6 * h.iter().cloned().fold(0.0, f64::max).max(1e-12);
    for _sweep in 0..if d == 1 { 1 } else { 6 } {
        for a in 0..d {
            let lo = (r[a] - h[a]).max(search.lo[a]);
            let hi = (r[a] + h[a]).min(search.hi[a]);
            let mut probe = r.clone();
            r[a] = golden_1d(
                lo,
                hi,
                |x| {
                    probe[a] = x;
                    det.eval(&probe)
                },
                tol,
            );
        }
    }
    let a_min = det.eval(&r);
    if a_min > threshold {
        return Err(WavepaxError::EmptySublevelSet {
            threshold,
            minimum: a_min,
        });
    }
    // extent along rays
    let dirs: Vec<Vec<f64>> = if d == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        (0..32)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 16.0;
                vec![t.cos(), t.sin()]
            })
            .collect()
    };
    let mut touches = false;
    let mut boundary = Vec::with_capacity(dirs.len());
    for u in &dirs {
        // largest t keeping r + t·u in the box
        let mut t_max = f64::INFINITY;
        for a in 0..d {
            if u[a] > 1e-14 {
                t_max = t_max.min((search.hi[a] - r[a]) / u[a]);
            } else if u[a] < -1e-14 {
                t_max = t_max.min((search.lo[a] - r[a]) / u[a]);
            }
        }
        let at = |t: f64| -> Vec<f64> { (0..d).map(|a| r[a] + t * u[a]).collect() };
        let t = if det.eval(&at(t_max)) <= threshold {
            touches = true;
            t_max
        } else {
            let (mut lo, mut hi) = (0.0, t_max);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if det.eval(&at(mid)) <= threshold {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= tol {
                    break;
                }
            }
            lo
        };
        boundary.push(at(t));
    }
    let mut diameter: f64 = 0.0;
    for i in 0..boundary.len() {
        for j in i + 1..boundary.len() {
            let q: f64 = (0..d)
                .map(|a| (boundary[i][a] - boundary[j][a]).powi(2))
                .sum();
            diameter = diameter.max(q.sqrt());
        }
    }
    Ok(PositionEstimate {
        r_hat: r,
        a_min,
        diameter,
        threshold,
        touches_boundary: touches,
    })
}

/// Particle norm `Σ_{l,ϑ}[β^{1+ε}‖∇_k(e^{ir_{*l}·k}w_{l,ϑ})‖_{L¹} + ‖w_{l,ϑ}‖_{L¹}]`
/// over pairs `(w_{l,ϑ}, r_{*l})`.
pub fn particle_norm(
    parts: &[(&ModalField, &[f64])],
    beta: f64,
    epsilon: f64,
    mode: GradientMode,
) -> f64 {
    let s = beta.powf(1.0 + epsilon);
    parts
        .iter()
        .map(|(w, r)| {
            let det = DetectionField::new(w, mode);
            s * det.eval(r) + det.mass()
        })
        .sum()
}

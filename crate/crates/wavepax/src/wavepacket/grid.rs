//! Uniform truncated k-grid and its dual r-grid.
//!
//! The k-grid has `n` nodes per dimension covering `[−K_max, K_max)` with
//! spacing `Δk = 2K_max/n`; node `j` sits at `k_j = (j − n/2)Δk`. The dual
//! r-grid has spacing `Δr = 2π/(2K_max)` and node `p` at `r_p = (p − n/2)Δr`,
//! so that the two grids are exact DFT duals (`Δk·Δr·n = 2π`). Multi-indices
//! are stored row-major with axis 0 slowest.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Uniform `d`-dimensional k-grid with `n` nodes per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Spatial dimension (1 or 2).
    pub d: usize,
    /// Nodes per dimension (power of two).
    pub n: usize,
    /// Half-extent of the k-domain.
    pub k_max: f64,
}

impl Grid {
    /// Validated constructor.
    pub fn new(d: usize, n: usize, k_max: f64) -> Result<Self> {
        if d != 1 && d != 2 {
            return invalid(format!("grid dimension must be 1 or 2, got {d}"));
        }
        if n < 2 || !n.is_power_of_two() {
            return invalid(format!(
                "grid node count must be a power of two ≥ 2, got {n}"
            ));
        }
        if !(k_max.is_finite() && k_max > 0.0) {
            return invalid(format!("k_max must be positive, got {k_max}"));
        }
        Ok(Grid { d, n, k_max })
    }

    /// Grid with prescribed spacing `Δk` (so `K_max = nΔk/2`).
    pub fn with_spacing(d: usize, n: usize, dk: f64) -> Result<Self> {
        Grid::new(d, n, 0.5 * n as f64 * dk)
    }

    /// k-spacing `Δk`.
    #[inline]
    pub fn dk(&self) -> f64 {
        2.0 * self.k_max / self.n as f64
    }

    /// r-spacing `Δr = 2π/(2K_max)`.
    #[inline]
    pub fn dr(&self) -> f64 {
        PI / self.k_max
    }

    /// Period of the dual r-grid, `nΔr = 2π/Δk`.
    #[inline]
    pub fn r_period(&self) -> f64 {
        self.n as f64 * self.dr()
    }

    /// Total number of nodes `n^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Always false (grids have at least two nodes); provided for API symmetry.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `Δk^d` of the L¹ sums.
    #[inline]
    pub fn weight(&self) -> f64 {
        self.dk().powi(self.d as i32)
    }

    /// r-space quadrature weight `Δr^d`.
    #[inline]
    pub fn r_weight(&self) -> f64 {
        self.dr().powi(self.d as i32)
    }

    /// Coordinate of k-node `j` along any axis.
    #[inline]
    pub fn k_axis(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dk()
    }

    /// Coordinate of r-node `p` along any axis.
    #[inline]
    pub fn r_axis(&self, p: usize) -> f64 {
        (p as f64 - (self.n / 2) as f64) * self.dr()
    }

    /// Per-axis indices of a flat index (unused axes are zero).
    #[inline]
    pub fn multi(&self, idx: usize) -> [usize; 2] {
        if self.d == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    /// Flat index of per-axis indices.
    #[inline]
    pub fn flat(&self, multi: [usize; 2]) -> usize {
        if self.d == 1 {
            multi[0]
        } else {
            multi[0] * self.n + multi[1]
        }
    }

    /// Wavevector of node `idx` written into the first `d` slots of `out`.
    #[inline]
    pub fn k_into(&self, idx: usize, out: &mut [f64; 2]) {
        let m = self.multi(idx);
        out[0] = self.k_axis(m[0]);
        out[1] = if self.d == 2 { self.k_axis(m[1]) } else { 0.0 };
    }

    /// Wavevector of node `idx`.
    pub fn k_at(&self, idx: usize) -> Vec<f64> {
        let m = self.multi(idx);
        (0..self.d).map(|a| self.k_axis(m[a])).collect()
    }

    /// Position of r-node `idx`.
    pub fn r_at(&self, idx: usize) -> Vec<f64> {
        let m = self.multi(idx);
        (0..self.d).map(|a| self.r_axis(m[a])).collect()
    }

    /// Index of the node at `−k` (periodic wrap for the unpaired edge node).
    #[inline]
    pub fn neg_index(&self, idx: usize) -> usize {
        let m = self.multi(idx);
        let neg = |j: usize| (self.n - j) % self.n;
        self.flat([neg(m[0]), if self.d == 2 { neg(m[1]) } else { 0 }])
    }

    /// Nearest node to the wavevector `k`, or `None` when outside the domain.
    pub fn nearest_index(&self, k: &[f64]) -> Option<usize> {
        if k.len() != self.d {
            return None;
        }
        let mut m = [0usize; 2];
        for a in 0..self.d {
            let j = (k[a] / self.dk()).round() + (self.n / 2) as f64;
            if j < 0.0 || j >= self.n as f64 {
                return None;
            }
            m[a] = j as usize;
        }
        Some(self.flat(m))
    }

    /// Whether `k` lies inside `[−K_max, K_max)^d`.
    pub fn contains(&self, k: &[f64]) -> bool {
        k.len() == self.d && k.iter().all(|&x| x >= -self.k_max && x < self.k_max)
    }

    /// `(−1)^{Σ_a j_a}` checkerboard factor used by the centred transforms.
    #[inline]
    pub(crate) fn checker(&self, idx: usize) -> f64 {
        let m = self.multi(idx);
        if (m[0] + m[1]).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

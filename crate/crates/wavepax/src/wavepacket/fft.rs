//! Multi-dimensional FFT helpers and the centred k ↔ r transforms.
//!
//! With `Û(k) = ∫U(r)e^{−ir·k}dr` and `U(r) = (2π)^{−d}∫Û(k)e^{ir·k}dk`, the
//! quadrature on the dual grids reduces to a DFT with checkerboard sign
//! factors because both grids are centred at node `n/2`.

use super::grid::Grid;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Unnormalised `d`-dimensional FFT of a square array with `n` points per axis.
pub struct NdFft {
    n: usize,
    d: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    column: Vec<Complex64>,
}

impl NdFft {
    /// Plans forward and inverse transforms.
    pub fn new(n: usize, d: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        NdFft {
            n,
            d,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            column: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of points `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Always false; provided for API symmetry.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform (`e^{−2πi jp/n}`), unnormalised.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        let plan = self.fwd.clone();
        self.run(plan.as_ref(), data);
    }

    /// In-place inverse transform (`e^{+2πi jp/n}`), unnormalised.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let plan = self.inv.clone();
        self.run(plan.as_ref(), data);
    }

    fn run(&mut self, plan: &dyn Fft<f64>, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.len());
        let n = self.n;
        // Rows (last axis, contiguous).
        for row in data.chunks_exact_mut(n) {
            plan.process_with_scratch(row, &mut self.scratch);
        }
        if self.d == 2 {
            for c in 0..n {
                for r in 0..n {
                    self.column[r] = data[r * n + c];
                }
                plan.process_with_scratch(&mut self.column, &mut self.scratch);
                for r in 0..n {
                    data[r * n + c] = self.column[r];
                }
            }
        }
    }
}

/// Centred continuous-Fourier transforms between the k-grid and the r-grid.
pub struct GridTransform {
    grid: Grid,
    fft: NdFft,
    k_to_r: f64,
    r_to_k: f64,
}

impl GridTransform {
    /// Prepares the transform pair for `grid`.
    pub fn new(grid: &Grid) -> Self {
        let parity = if (grid.n / 2 * grid.d).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        GridTransform {
            grid: grid.clone(),
            fft: NdFft::new(grid.n, grid.d),
            k_to_r: parity * (grid.dk() / (2.0 * PI)).powi(grid.d as i32),
            r_to_k: parity * grid.r_weight(),
        }
    }

    /// The grid this transform acts on.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `U(r_p) = (2π)^{−d} Σ_j Û(k_j) e^{i r_p·k_j} Δk^d`, in place.
    pub fn to_r(&mut self, data: &mut [Complex64]) {
        for (idx, v) in data.iter_mut().enumerate() {
            *v *= self.grid.checker(idx);
        }
        self.fft.inverse(data);
        for (idx, v) in data.iter_mut().enumerate() {
            *v *= self.k_to_r * self.grid.checker(idx);
        }
    }

    /// `Û(k_j) = Σ_p U(r_p) e^{−i r_p·k_j} Δr^d`, in place.
    pub fn to_k(&mut self, data: &mut [Complex64]) {
        for (idx, v) in data.iter_mut().enumerate() {
            *v *= self.grid.checker(idx);
        }
        self.fft.forward(data);
        for (idx, v) in data.iter_mut().enumerate() {
            *v *= self.r_to_k * self.grid.checker(idx);
        }
    }
}

//! Complex `2J`-component fields sampled on the k-grid.

use super::fft::GridTransform;
use super::grid::Grid;
use crate::error::{Result, WavepaxError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Which frame a modal field is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// The physical variable `Û`.
    #[serde(rename = "fast")]
    Fast,
    /// The slow variable `û = e^{iτL/ϱ}Û`.
    #[serde(rename = "slow")]
    Slow,
}

/// Complex field with `ncomp` components on a k-grid, stored components-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ModalField {
    pub grid: Grid,
    pub ncomp: usize,
    pub frame: Frame,
    /// Component `c` occupies `data[c·len .. (c+1)·len]`.
    pub data: Vec<Complex64>,
}

impl ModalField {
    /// Zero field.
    pub fn zeros(grid: &Grid, ncomp: usize, frame: Frame) -> Self {
        ModalField {
            grid: grid.clone(),
            ncomp,
            frame,
            data: vec![Complex64::new(0.0, 0.0); ncomp * grid.len()],
        }
    }

    /// Field from raw data; checks the length.
    pub fn from_data(
        grid: &Grid,
        ncomp: usize,
        frame: Frame,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        if data.len() != ncomp * grid.len() {
            return Err(WavepaxError::GridMismatch(format!(
                "data length {} ≠ {} components × {} nodes",
                data.len(),
                ncomp,
                grid.len()
            )));
        }
        Ok(ModalField {
            grid: grid.clone(),
            ncomp,
            frame,
            data,
        })
    }

    /// Number of grid nodes.
    #[inline]
    pub fn nodes(&self) -> usize {
        self.grid.len()
    }

    /// Component `c` as a slice.
    #[inline]
    pub fn comp(&self, c: usize) -> &[Complex64] {
        let n = self.nodes();
        &self.data[c * n..(c + 1) * n]
    }

    /// Component `c` as a mutable slice.
    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.nodes();
        &mut self.data[c * n..(c + 1) * n]
    }

    /// Value of component `c` at node `idx`.
    #[inline]
    pub fn at(&self, c: usize, idx: usize) -> Complex64 {
        self.data[c * self.nodes() + idx]
    }

    /// Euclidean norm of the component vector at node `idx`.
    #[inline]
    pub fn pointwise_norm(&self, idx: usize) -> f64 {
        let n = self.nodes();
        (0..self.ncomp)
            .map(|c| self.data[c * n + idx].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖·‖_{L¹} = Σ_k |v(k)| Δk^d`.
    pub fn l1_norm(&self) -> f64 {
        l1_of(&self.data, self.ncomp, &self.grid)
    }

    /// Weighted norm `Σ_k (1+|k|)^a |v(k)| Δk^d`.
    pub fn l1_weighted(&self, a: f64) -> f64 {
        let mut k = [0.0; 2];
        let mut s = 0.0;
        for idx in 0..self.nodes() {
            self.grid.k_into(idx, &mut k);
            let kn = (k[0] * k[0] + k[1] * k[1]).sqrt();
            s += (1.0 + kn).powf(a) * self.pointwise_norm(idx);
        }
        s * self.grid.weight()
    }

    /// Largest pointwise modulus over nodes and components.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Ensures `other` lives on the same grid with the same component count.
    pub fn check_compatible(&self, other: &ModalField) -> Result<()> {
        if self.grid != other.grid || self.ncomp != other.ncomp {
            return Err(WavepaxError::GridMismatch(format!(
                "({:?}, {} comps) vs ({:?}, {} comps)",
                self.grid, self.ncomp, other.grid, other.ncomp
            )));
        }
        Ok(())
    }

    /// `self += other`.
    pub fn add_assign(&mut self, other: &ModalField) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    /// `self − other`.
    pub fn sub(&self, other: &ModalField) -> Result<ModalField> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        Ok(out)
    }

    /// `s · self`.
    pub fn scaled(&self, s: Complex64) -> ModalField {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Multiplies every component by the real node weight `w(idx)`.
    pub fn mul_node_weights(&mut self, w: &[f64]) {
        let n = self.nodes();
        for c in 0..self.ncomp {
            for (v, &wi) in self.data[c * n..(c + 1) * n].iter_mut().zip(w) {
                *v *= wi;
            }
        }
    }

    /// r-space reconstruction of every component (components-major).
    pub fn to_r_space(&self, transform: &mut GridTransform) -> Vec<Complex64> {
        let mut out = self.data.clone();
        let n = self.nodes();
        for c in 0..self.ncomp {
            transform.to_r(&mut out[c * n..(c + 1) * n]);
        }
        out
    }

    /// Field from r-space samples (components-major).
    pub fn from_r_space(
        grid: &Grid,
        ncomp: usize,
        frame: Frame,
        mut values: Vec<Complex64>,
        transform: &mut GridTransform,
    ) -> Result<Self> {
        let n = grid.len();
        if values.len() != n * ncomp {
            return Err(WavepaxError::GridMismatch("r-space sample count".into()));
        }
        for c in 0..ncomp {
            transform.to_k(&mut values[c * n..(c + 1) * n]);
        }
        ModalField::from_data(grid, ncomp, frame, values)
    }
}

/// L¹ norm of raw components-major data on `grid`.
pub fn l1_of(data: &[Complex64], ncomp: usize, grid: &Grid) -> f64 {
    let n = grid.len();
    let mut s = 0.0;
    for idx in 0..n {
        let mut p = 0.0;
        for c in 0..ncomp {
            p += data[c * n + idx].norm_sqr();
        }
        s += p.sqrt();
    }
    s * grid.weight()
}

/// L¹ distance of two raw components-major arrays on `grid`.
pub fn l1_distance(a: &[Complex64], b: &[Complex64], ncomp: usize, grid: &Grid) -> f64 {
    let n = grid.len();
    let mut s = 0.0;
    for idx in 0..n {
        let mut p = 0.0;
        for c in 0..ncomp {
            p += (a[c * n + idx] - b[c * n + idx]).norm_sqr();
        }
        s += p.sqrt();
    }
    s * grid.weight()
}

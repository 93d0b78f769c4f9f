//! Per-node eigen-decomposition of the symbol on a grid.

use super::model::DispersionModel;
use crate::wavepacket::Grid;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// Eigendata of `L(k)` at every node of a grid.
///
/// Diagonal (scalar-band) models keep only the eigenvalues; matrix models
/// keep the unitary eigenvector matrices as well.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    pub grid: Grid,
    pub ncomp: usize,
    /// Eigenvalues, components-major: `values[c·len + idx]`.
    pub values: Vec<f64>,
    /// Eigenvectors per node (columns in slot order); `None` when diagonal.
    pub vectors: Option<Vec<DMatrix<Complex64>>>,
    /// Nodes flagged band-crossing (eigen-gap below tolerance, misordered or
    /// failed evaluations).
    pub flagged: Vec<bool>,
}

impl SymbolTable {
    /// Evaluates the model at every node of `grid`.
    pub fn new(model: &DispersionModel, grid: &Grid) -> SymbolTable {
        let ncomp = model.ncomp();
        let len = grid.len();
        let nodes: Vec<_> = (0..len)
            .into_par_iter()
            .map(|idx| {
                let k = grid.k_at(idx);
                match model.eigen_raw(&k) {
                    Ok(e) => {
                        let flag = e.misordered || !(e.min_gap >= model.tol.gap);
                        (e.values, e.vectors, flag)
                    }
                    Err(_) => (
                        vec![0.0; ncomp],
                        Some(DMatrix::identity(ncomp, ncomp)),
                        true,
                    ),
                }
            })
            .collect();
        let mut values = vec![0.0; ncomp * len];
        let mut flagged = vec![false; len];
        let diagonal = model.is_diagonal();
        let mut vectors = if diagonal {
            None
        } else {
            Some(Vec::with_capacity(len))
        };
        for (idx, (vals, vecs, flag)) in nodes.into_iter().enumerate() {
            for c in 0..ncomp {
                values[c * len + idx] = vals[c];
            }
            flagged[idx] = flag;
            if let Some(vs) = vectors.as_mut() {
                vs.push(vecs.unwrap_or_else(|| DMatrix::identity(ncomp, ncomp)));
            }
        }
        SymbolTable {
            grid: grid.clone(),
            ncomp,
            values,
            vectors,
            flagged,
        }
    }

    /// Eigenvalue of slot `c` at node `idx`.
    #[inline]
    pub fn value(&self, c: usize, idx: usize) -> f64 {
        self.values[c * self.grid.len() + idx]
    }

    /// Largest `|ω|` over the grid.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Applies `e^{−i s L(k)}` to a components-major field in place.
    pub fn apply_exp(&self, s: f64, data: &mut [Complex64]) {
        let len = self.grid.len();
        let ncomp = self.ncomp;
        match &self.vectors {
            None => {
                for c in 0..ncomp {
                    let vals = &self.values[c * len..(c + 1) * len];
                    for (v, &w) in data[c * len..(c + 1) * len].iter_mut().zip(vals) {
                        *v *= Complex64::from_polar(1.0, -s * w);
                    }
                }
            }
            Some(vecs) => {
                let mut u = vec![Complex64::new(0.0, 0.0); ncomp];
                let mut a = vec![Complex64::new(0.0, 0.0); ncomp];
                for idx in 0..len {
                    let v = &vecs[idx];
                    for c in 0..ncomp {
                        u[c] = data[c * len + idx];
                    }
                    // a = diag(e^{−isω}) V† u
                    for (c, ac) in a.iter_mut().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for r in 0..ncomp {
                            acc += v[(r, c)].conj() * u[r];
                        }
                        *ac = acc * Complex64::from_polar(1.0, -s * self.values[c * len + idx]);
                    }
                    for r in 0..ncomp {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for c in 0..ncomp {
                            acc += v[(r, c)] * a[c];
                        }
                        data[r * len + idx] = acc;
                    }
                }
            }
        }
    }

    /// Applies `Π_c(k)` (slot `c`) to a components-major field, returning the
    /// projected field.
    pub fn project(&self, c: usize, data: &[Complex64]) -> Vec<Complex64> {
        let len = self.grid.len();
        let ncomp = self.ncomp;
        let mut out = vec![Complex64::new(0.0, 0.0); ncomp * len];
        match &self.vectors {
            None => {
                out[c * len..(c + 1) * len].copy_from_slice(&data[c * len..(c + 1) * len]);
            }
            Some(vecs) => {
                for idx in 0..len {
                    let v = &vecs[idx];
                    let mut a = Complex64::new(0.0, 0.0);
                    for r in 0..ncomp {
                        a += v[(r, c)].conj() * data[r * len + idx];
                    }
                    for r in 0..ncomp {
                        out[r * len + idx] = v[(r, c)] * a;
                    }
                }
            }
        }
        out
    }

    /// Eigenvector entry `g_c(k_idx)[r]`.
    #[inline]
    pub fn vector_entry(&self, idx: usize, r: usize, c: usize) -> Complex64 {
        match &self.vectors {
            None => {
                if r == c {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Some(v) => v[idx][(r, c)],
        }
    }

    /// Number of flagged nodes.
    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }
}

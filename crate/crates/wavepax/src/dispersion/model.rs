//! The dispersion model: band functions, eigenprojectors and group velocities
//! of the Hermitian symbol `L(k)`.
//!
//! Components are laid out in *slot* order: slot `c < J` carries the band
//! `(n, ζ) = (c + 1, +)` and slot `c ≥ J` the band `(c − J + 1, −)`. For
//! scalar-band models the symbol is diagonal in this layout,
//! `L(k) = diag(ω_1(k), …, ω_J(k), −ω_1(−k), …, −ω_J(−k))`; for matrix models
//! the eigenpairs are sorted into the same slots.

use crate::error::{Result, WavepaxError};
use crate::sign::Sign;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Callback `k ↦ L(k)`; `None` marks a failed evaluation.
pub type SymbolFn = Arc<dyn Fn(&[f64]) -> Option<DMatrix<Complex64>> + Send + Sync>;

/// Callback `k ↦ ω(k)` of a custom scalar band.
pub type BandFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Closed-form scalar band `ω(k)`.
#[derive(Clone)]
pub enum ScalarBand {
    /// `ω = a₂|k|² + a₀`.
    Quadratic { a2: f64, a0: f64 },
    /// `ω = |k|^p + a₀`.
    Power { p: f64, a0: f64 },
    /// `ω = c|k| + a₀`.
    Linear { c: f64, a0: f64 },
    /// Arbitrary smooth band; derivatives by finite differences.
    Custom(BandFn),
}

impl fmt::Debug for ScalarBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarBand::Quadratic { a2, a0 } => write!(f, "Quadratic {{ a2: {a2}, a0: {a0} }}"),
            ScalarBand::Power { p, a0 } => write!(f, "Power {{ p: {p}, a0: {a0} }}"),
            ScalarBand::Linear { c, a0 } => write!(f, "Linear {{ c: {c}, a0: {a0} }}"),
            ScalarBand::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

fn norm(k: &[f64]) -> f64 {
    k.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl ScalarBand {
    /// `ω(k)`.
    pub fn value(&self, k: &[f64]) -> f64 {
        match self {
            ScalarBand::Quadratic { a2, a0 } => a2 * k.iter().map(|x| x * x).sum::<f64>() + a0,
            ScalarBand::Power { p, a0 } => norm(k).powf(*p) + a0,
            ScalarBand::Linear { c, a0 } => c * norm(k) + a0,
            ScalarBand::Custom(f) => f(k),
        }
    }

    /// Analytic gradient, when the band has one at `k`.
    pub fn gradient(&self, k: &[f64]) -> Option<Vec<f64>> {
        match self {
            ScalarBand::Quadratic { a2, .. } => Some(k.iter().map(|x| 2.0 * a2 * x).collect()),
            ScalarBand::Power { p, .. } => {
                let r = norm(k);
                if r == 0.0 {
                    return if *p > 1.0 {
                        Some(vec![0.0; k.len()])
                    } else {
                        None
                    };
                }
                let s = p * r.powf(p - 2.0);
                Some(k.iter().map(|x| s * x).collect())
            }
            ScalarBand::Linear { c, .. } => {
                let r = norm(k);
                if r == 0.0 {
                    return None;
                }
                Some(k.iter().map(|x| c * x / r).collect())
            }
            ScalarBand::Custom(_) => None,
        }
    }

    /// Analytic Hessian (row-major `d × d`), when available at `k`.
    pub fn hessian(&self, k: &[f64]) -> Option<Vec<f64>> {
        let d = k.len();
        let r = norm(k);
        let mut h = vec![0.0; d * d];
        match self {
            ScalarBand::Quadratic { a2, .. } => {
                for a in 0..d {
                    h[a * d + a] = 2.0 * a2;
                }
            }
            ScalarBand::Power { p, .. } => {
                if r == 0.0 {
                    return None;
                }
                // p r^{p−2} (I + (p−2) k̂k̂ᵀ)
                let s = p * r.powf(p - 2.0);
                for a in 0..d {
                    for b in 0..d {
                        let id = if a == b { 1.0 } else { 0.0 };
                        h[a * d + b] = s * (id + (p - 2.0) * k[a] * k[b] / (r * r));
                    }
                }
            }
            ScalarBand::Linear { c, .. } => {
                if r == 0.0 {
                    return None;
                }
                // (c/r)(I − k̂k̂ᵀ)
                for a in 0..d {
                    for b in 0..d {
                        let id = if a == b { 1.0 } else { 0.0 };
                        h[a * d + b] = c / r * (id - k[a] * k[b] / (r * r));
                    }
                }
            }
            ScalarBand::Custom(_) => return None,
        }
        Some(h)
    }
}

/// Kind of symbol representation.
#[derive(Clone)]
pub enum ModelKind {
    /// Closed-form bands `ω_1, …, ω_J`, sorted pointwise.
    Scalar(Vec<ScalarBand>),
    /// Hermitian `2J × 2J` matrix callback.
    Matrix(SymbolFn),
}

/// How complex conjugation acts on the component vector of a real field:
/// a field is real iff `Û(−k) = C·conj Û(k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conjugation {
    /// Components are themselves real fields.
    Identity,
    /// Slot `c` is conjugate to slot `c ± J` (scalar-band layout).
    Swap,
}

/// Numerical tolerances of a model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Absolute eigen-gap below which a node is band-crossing.
    pub gap: f64,
    /// Symmetry tolerance (relative).
    pub sym: f64,
    /// Projector tolerance.
    pub proj: f64,
    /// Finite-difference step.
    pub h_fd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gap: 1e-8,
            sym: 1e-9,
            proj: 1e-9,
            h_fd: 1e-5,
        }
    }
}

/// Eigen-decomposition of `L(k)` in slot order.
#[derive(Clone, Debug)]
pub struct SlotEigen {
    /// Eigenvalues `ω_{n,ζ}(k)` in slot order.
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns in slot order (`None` for scalar models,
    /// whose eigenvectors are the canonical basis).
    pub vectors: Option<DMatrix<Complex64>>,
    /// Smallest separation among eigenvalues, including `|ω_{1,±}|`.
    pub min_gap: f64,
    /// Whether the node violates the band ordering (wrong number of positive
    /// eigenvalues).
    pub misordered: bool,
}

/// Linear symbol `L(k)` of a dispersive system.
#[derive(Clone)]
pub struct DispersionModel {
    /// Spatial dimension.
    pub d: usize,
    /// Number of band pairs `J`.
    pub j: usize,
    /// Representation.
    pub kind: ModelKind,
    /// Human-readable name.
    pub name: String,
    /// Tolerances.
    pub tol: Tolerances,
}

impl fmt::Debug for DispersionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            ModelKind::Scalar(b) => format!("Scalar({b:?})"),
            ModelKind::Matrix(_) => "Matrix(..)".to_string(),
        };
        f.debug_struct("DispersionModel")
            .field("d", &self.d)
            .field("j", &self.j)
            .field("kind", &kind)
            .field("name", &self.name)
            .field("tol", &self.tol)
            .finish()
    }
}

impl DispersionModel {
    /// Scalar-band model with `J = bands.len()`.
    pub fn scalar(d: usize, bands: Vec<ScalarBand>, name: impl Into<String>) -> Result<Self> {
        if d != 1 && d != 2 {
            return crate::error::invalid(format!("dimension must be 1 or 2, got {d}"));
        }
        if bands.is_empty() {
            return crate::error::invalid("a scalar model needs at least one band");
        }
        Ok(DispersionModel {
            d,
            j: bands.len(),
            kind: ModelKind::Scalar(bands),
            name: name.into(),
            tol: Tolerances::default(),
        })
    }

    /// Matrix-symbol model with `J` band pairs.
    pub fn matrix(d: usize, j: usize, symbol: SymbolFn, name: impl Into<String>) -> Result<Self> {
        if d != 1 && d != 2 {
            return crate::error::invalid(format!("dimension must be 1 or 2, got {d}"));
        }
        if j == 0 {
            return crate::error::invalid("a matrix model needs J ≥ 1");
        }
        Ok(DispersionModel {
            d,
            j,
            kind: ModelKind::Matrix(symbol),
            name: name.into(),
            tol: Tolerances::default(),
        })
    }

    /// Single quadratic band `ω = a₂|k|² + a₀`.
    pub fn quadratic(d: usize, a2: f64, a0: f64) -> Result<Self> {
        DispersionModel::scalar(d, vec![ScalarBand::Quadratic { a2, a0 }], "nls")
    }

    /// Number of components `2J`.
    #[inline]
    pub fn ncomp(&self) -> usize {
        2 * self.j
    }

    /// Whether the symbol is diagonal in the slot layout.
    pub fn is_diagonal(&self) -> bool {
        matches!(self.kind, ModelKind::Scalar(_))
    }

    /// Conjugation involution of the component layout.
    pub fn conjugation(&self) -> Conjugation {
        match self.kind {
            ModelKind::Scalar(_) => Conjugation::Swap,
            ModelKind::Matrix(_) => Conjugation::Identity,
        }
    }

    /// Slot of band `(n, ζ)` (`n` is 1-based).
    pub fn slot(&self, n: usize, zeta: Sign) -> Result<usize> {
        if n == 0 || n > self.j {
            return crate::error::invalid(format!("band index {n} outside 1..={}", self.j));
        }
        Ok(match zeta {
            Sign::Plus => n - 1,
            Sign::Minus => self.j + n - 1,
        })
    }

    /// Band `(n, ζ)` of a slot.
    pub fn band_of_slot(&self, c: usize) -> (usize, Sign) {
        if c < self.j {
            (c + 1, Sign::Plus)
        } else {
            (c - self.j + 1, Sign::Minus)
        }
    }

    /// Returns a copy with tolerances calibrated on `grid`:
    /// `tol_gap = 1e-8(1 + max|ω|)` and `h_fd = 1e-2·Δk`.
    pub fn calibrated(&self, grid: &crate::wavepacket::Grid) -> DispersionModel {
        let mut scale: f64 = 0.0;
        for idx in 0..grid.len() {
            if let Ok(e) = self.eigen_raw(&grid.k_at(idx)) {
                for v in e.values {
                    scale = scale.max(v.abs());
                }
            }
        }
        let mut out = self.clone();
        out.tol.gap = 1e-8 * (1.0 + scale);
        out.tol.h_fd = 1e-2 * grid.dk();
        out
    }

    /// Scalar band functions sorted at `k`: returns (values ascending, band
    /// index of each).
    fn sorted_scalar(bands: &[ScalarBand], k: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let mut v: Vec<(f64, usize)> = bands
            .iter()
            .enumerate()
            .map(|(i, b)| (b.value(k), i))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        (
            v.iter().map(|x| x.0).collect(),
            v.iter().map(|x| x.1).collect(),
        )
    }

    /// The symbol matrix `L(k)`.
    pub fn symbol(&self, k: &[f64]) -> Option<DMatrix<Complex64>> {
        match &self.kind {
            ModelKind::Scalar(_) => {
                let e = self.eigen_raw(k).ok()?;
                Some(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    self.ncomp(),
                    e.values.iter().map(|&v| Complex64::new(v, 0.0)),
                )))
            }
            ModelKind::Matrix(f) => f(k),
        }
    }

    /// Eigen-decomposition in slot order without band-crossing checks
    /// (fails only when the symbol cannot be evaluated).
    pub fn eigen_raw(&self, k: &[f64]) -> Result<SlotEigen> {
        if k.len() != self.d {
            return crate::error::invalid(format!(
                "wavevector has {} components, model dimension {}",
                k.len(),
                self.d
            ));
        }
        let j = self.j;
        match &self.kind {
            ModelKind::Scalar(bands) => {
                let (plus, _) = Self::sorted_scalar(bands, k);
                let mk: Vec<f64> = k.iter().map(|x| -x).collect();
                let (minus, _) = Self::sorted_scalar(bands, &mk);
                let mut values = plus.clone();
                values.extend(minus.iter().map(|v| -v));
                let misordered = plus.iter().chain(&minus).any(|&v| v <= 0.0);
                let mut min_gap = plus[0].abs().min(minus[0].abs());
                for w in plus.windows(2).chain(minus.windows(2)) {
                    min_gap = min_gap.min((w[1] - w[0]).abs());
                }
                Ok(SlotEigen {
                    values,
                    vectors: None,
                    min_gap,
                    misordered,
                })
            }
            ModelKind::Matrix(f) => {
                let m = f(k).ok_or_else(|| WavepaxError::BandCrossing {
                    k: k.to_vec(),
                    gap: f64::NAN,
                    tol: self.tol.gap,
                })?;
                if m.nrows() != 2 * j || m.ncols() != 2 * j {
                    return crate::error::invalid(format!(
                        "symbol is {}×{}, expected {}×{}",
                        m.nrows(),
                        m.ncols(),
                        2 * j,
                        2 * j
                    ));
                }
                let eig = m.symmetric_eigen();
                let mut order: Vec<usize> = (0..2 * j).collect();
                // descending eigenvalues
                order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
                let sorted: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let npos = sorted.iter().filter(|&&v| v > 0.0).count();
                let misordered = npos != j;
                let mut min_gap = f64::INFINITY;
                for w in sorted.windows(2) {
                    min_gap = min_gap.min(w[0] - w[1]);
                }
                // slots: positives ascending (closest to zero first), then
                // negatives closest to zero first
                let mut slots = Vec::with_capacity(2 * j);
                for s in 0..j {
                    slots.push(order[j - 1 - s]);
                }
                for s in 0..j {
                    slots.push(order[j + s]);
                }
                min_gap = min_gap
                    .min(eig.eigenvalues[slots[0]].abs())
                    .min(eig.eigenvalues[slots[j]].abs());
                let values = slots.iter().map(|&i| eig.eigenvalues[i]).collect();
                let vectors =
                    DMatrix::from_fn(2 * j, 2 * j, |r, c| eig.eigenvectors[(r, slots[c])]);
                Ok(SlotEigen {
                    values,
                    vectors: Some(vectors),
                    min_gap,
                    misordered,
                })
            }
        }
    }

    /// Eigen-decomposition with the band-crossing check of `tol.gap`.
    pub fn eigen(&self, k: &[f64]) -> Result<SlotEigen> {
        let e = self.eigen_raw(k)?;
        if e.misordered || !(e.min_gap >= self.tol.gap) {
            return Err(WavepaxError::BandCrossing {
                k: k.to_vec(),
                gap: e.min_gap,
                tol: self.tol.gap,
            });
        }
        Ok(e)
    }

    /// Whether `k` is a band-crossing point of the model.
    pub fn is_band_crossing(&self, k: &[f64]) -> bool {
        self.eigen(k).is_err()
    }

    /// `ω_{n,ζ}(k)`.
    pub fn eval_omega(&self, n: usize, zeta: Sign, k: &[f64]) -> Result<f64> {
        let c = self.slot(n, zeta)?;
        Ok(self.eigen(k)?.values[c])
    }

    /// `ω_{n,ζ}(k)` without the band-crossing check.
    pub fn eval_omega_unchecked(&self, n: usize, zeta: Sign, k: &[f64]) -> Result<f64> {
        let c = self.slot(n, zeta)?;
        Ok(self.eigen_raw(k)?.values[c])
    }

    /// Analytic gradient of band `(n, ζ)` when available.
    fn analytic_gradient(&self, n: usize, zeta: Sign, k: &[f64]) -> Option<Vec<f64>> {
        let ModelKind::Scalar(bands) = &self.kind else {
            return None;
        };
        // ω_{n,ζ}(k) = ζ ω_n(ζk) ⇒ ∇ω_{n,ζ}(k) = (∇ω_n)(ζk)
        let zk: Vec<f64> = k.iter().map(|x| zeta.f() * x).collect();
        let (_, idx) = Self::sorted_scalar(bands, &zk);
        bands[idx[n - 1]].gradient(&zk)
    }

    /// Central finite-difference gradient of band `(n, ζ)` with step `h`.
    pub fn fd_gradient(&self, n: usize, zeta: Sign, k: &[f64], h: f64) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.d];
        let mut kp = k.to_vec();
        for a in 0..self.d {
            kp[a] = k[a] + h;
            let fp = self.eval_omega_unchecked(n, zeta, &kp)?;
            kp[a] = k[a] - h;
            let fm = self.eval_omega_unchecked(n, zeta, &kp)?;
            kp[a] = k[a];
            g[a] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }

    /// Group velocity `∇_k ω_{n,ζ}(k)`: analytic when available, otherwise
    /// central differences with step `tol.h_fd`.
    pub fn group_velocity(&self, n: usize, zeta: Sign, k: &[f64]) -> Result<Vec<f64>> {
        self.eigen(k)?;
        if let Some(g) = self.analytic_gradient(n, zeta, k) {
            return Ok(g);
        }
        self.fd_gradient(n, zeta, k, self.tol.h_fd)
    }

    /// Hessian `∇²ω_{n,ζ}(k)` (row-major `d × d`).
    pub fn hessian(&self, n: usize, zeta: Sign, k: &[f64]) -> Result<Vec<f64>> {
        self.eigen(k)?;
        if let ModelKind::Scalar(bands) = &self.kind {
            let zk: Vec<f64> = k.iter().map(|x| zeta.f() * x).collect();
            let (_, idx) = Self::sorted_scalar(bands, &zk);
            if let Some(h) = bands[idx[n - 1]].hessian(&zk) {
                // ∇²ω_{n,ζ}(k) = ζ (∇²ω_n)(ζk)
                return Ok(h.into_iter().map(|v| zeta.f() * v).collect());
            }
        }
        let d = self.d;
        let h = self.tol.h_fd.max(1e-4);
        let mut out = vec![0.0; d * d];
        let mut kp = k.to_vec();
        for a in 0..d {
            kp[a] = k[a] + h;
            let gp = self.fd_gradient(n, zeta, &kp, h)?;
            kp[a] = k[a] - h;
            let gm = self.fd_gradient(n, zeta, &kp, h)?;
            kp[a] = k[a];
            for b in 0..d {
                out[a * d + b] = (gp[b] - gm[b]) / (2.0 * h);
            }
        }
        // symmetrize
        for a in 0..d {
            for b in 0..a {
                let s = 0.5 * (out[a * d + b] + out[b * d + a]);
                out[a * d + b] = s;
                out[b * d + a] = s;
            }
        }
        Ok(out)
    }

    /// Orthogonal projector `Π_{n,ζ}(k)` onto the eigenline of `(n, ζ)`.
    pub fn eval_projector(&self, n: usize, zeta: Sign, k: &[f64]) -> Result<DMatrix<Complex64>> {
        let c = self.slot(n, zeta)?;
        let e = self.eigen(k)?;
        Ok(projector_from(&e, c, self.ncomp()))
    }
}

/// Rank-one projector of slot `c` from an eigen-decomposition.
pub fn projector_from(e: &SlotEigen, c: usize, ncomp: usize) -> DMatrix<Complex64> {
    match &e.vectors {
        None => {
            let mut p = DMatrix::zeros(ncomp, ncomp);
            p[(c, c)] = Complex64::new(1.0, 0.0);
            p
        }
        Some(v) => {
            let col = v.column(c);
            col * col.adjoint()
        }
    }
}

/// Operator norm of a symmetric `d × d` matrix stored row-major (`d ≤ 2`).
pub fn sym_opnorm(h: &[f64], d: usize) -> f64 {
    if d == 1 {
        return h[0].abs();
    }
    let (a, b, c) = (h[0], 0.5 * (h[1] + h[2]), h[3]);
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mean + rad).abs().max((mean - rad).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag_abs() -> DispersionModel {
        let f: SymbolFn = Arc::new(|k: &[f64]| {
            let w = k[0].abs();
            Some(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::new(w, 0.0),
                Complex64::new(-w, 0.0),
            ])))
        });
        DispersionModel::matrix(1, 1, f, "abs").unwrap()
    }

    #[test]
    fn nls_band_values() {
        let m = DispersionModel::quadratic(1, 1.0, 0.0).unwrap();
        assert_eq!(m.eval_omega(1, Sign::Plus, &[2.0]).unwrap(), 4.0);
        assert_eq!(m.eval_omega(1, Sign::Minus, &[2.0]).unwrap(), -4.0);
        assert_eq!(m.group_velocity(1, Sign::Plus, &[1.5]).unwrap(), vec![3.0]);
        // ∇ω_{1,−}(k) = ∇ω(−k)
        assert_eq!(
            m.group_velocity(1, Sign::Minus, &[1.5]).unwrap(),
            vec![-3.0]
        );
    }

    #[test]
    fn zero_frequency_is_band_crossing() {
        let m = DispersionModel::quadratic(1, 1.0, 0.0).unwrap();
        assert!(m.is_band_crossing(&[0.0]));
        assert!(matches!(
            m.eval_omega(1, Sign::Plus, &[0.0]),
            Err(WavepaxError::BandCrossing { .. })
        ));
        let m1 = DispersionModel::quadratic(1, 1.0, 1.0).unwrap();
        assert!(!m1.is_band_crossing(&[0.0]));
    }

    #[test]
    fn matrix_symbol_matches_scalar_path() {
        let m = diag_abs();
        let e = m.eigen(&[3.0]).unwrap();
        assert_relative_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(e.values[1], -3.0, epsilon = 1e-14);
        let p = m.eval_projector(1, Sign::Plus, &[3.0]).unwrap();
        assert_relative_eq!(p[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(p[(1, 1)].norm(), 0.0, epsilon = 1e-14);
        // finite-difference gradient vs closed form |k|' = 1
        let g = m.group_velocity(1, Sign::Plus, &[3.0]).unwrap();
        assert_relative_eq!(g[0], 1.0, max_relative = 1e-6);
    }

    #[test]
    fn diagonal_projectors() {
        let m = DispersionModel::quadratic(1, 1.0, 1.0).unwrap();
        let p = m.eval_projector(1, Sign::Minus, &[0.3]).unwrap();
        assert_eq!(p[(1, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(p[(0, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn analytic_hessians() {
        let m = DispersionModel::quadratic(2, 1.0, 1.0).unwrap();
        let h = m.hessian(1, Sign::Plus, &[1.0, 0.0]).unwrap();
        assert_eq!(h, vec![2.0, 0.0, 0.0, 2.0]);
        assert_eq!(sym_opnorm(&h, 2), 2.0);
        let p = DispersionModel::scalar(1, vec![ScalarBand::Power { p: 3.0, a0: 1.0 }], "cube")
            .unwrap();
        // ω'' = 6|k|
        assert_relative_eq!(
            p.hessian(1, Sign::Plus, &[2.0]).unwrap()[0],
            12.0,
            epsilon = 1e-12
        );
        // ω_{1,−}(k) = −ω(−k) ⇒ ω''_{1,−}(k) = −ω''(−k)
        assert_relative_eq!(
            p.hessian(1, Sign::Minus, &[2.0]).unwrap()[0],
            -12.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn twoband_sorting() {
        let m = DispersionModel::scalar(
            1,
            vec![
                ScalarBand::Quadratic { a2: 1.0, a0: 0.0 },
                ScalarBand::Linear { c: 2.0, a0: 0.0 },
            ],
            "twoband",
        )
        .unwrap();
        // below |k| = 2 the quadratic band is lower
        assert_relative_eq!(m.eval_omega(1, Sign::Plus, &[1.0]).unwrap(), 1.0);
        assert_relative_eq!(m.eval_omega(2, Sign::Plus, &[1.0]).unwrap(), 2.0);
        assert_relative_eq!(m.eval_omega(1, Sign::Plus, &[3.0]).unwrap(), 6.0);
        assert_eq!(m.group_velocity(1, Sign::Plus, &[3.0]).unwrap(), vec![2.0]);
        assert!(m.is_band_crossing(&[2.0]));
    }
}

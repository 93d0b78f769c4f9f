//! Discrete convolutions `F̂^{(m)}(Û₁,…,Û_m)(k) = (Δk/2π)^{(m−1)d} Σ_{k′+…+k^{(m)}=k} χ Û₁(k′)…Û_m(k^{(m)})`.
//!
//! The FFT path zero-pads every axis to `M = ⌈(m+1)/2⌉·N` nodes, which makes
//! the cyclic convolution exact on the retained output window. The direct
//! path evaluates the literal `(m−1)d`-fold sum and serves as an oracle.

use super::susceptibility::{Nonlinearity, Susceptibility};
use crate::error::{invalid, Result, WavepaxError};
use crate::wavepacket::{Grid, ModalField, NdFft};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Convolution algorithm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMode {
    #[default]
    Fft,
    /// Literal sum; limited to grids with at most `64^d` nodes.
    DirectOracle,
}

/// Largest per-axis node count accepted by the direct oracle.
pub const DIRECT_MAX_N: usize = 64;

/// Reusable convolution workspace for one grid.
pub struct Convolver {
    grid: Grid,
    mode: ConvolutionMode,
    /// Padding factor (`0` = automatic `⌈(m+1)/2⌉`).
    padding: usize,
    /// Padded FFTs keyed by padded size.
    ffts: HashMap<usize, NdFft>,
}

impl Convolver {
    pub fn new(grid: &Grid, mode: ConvolutionMode) -> Result<Self> {
        Self::with_padding(grid, mode, 0)
    }

    /// Convolver with a fixed zero-padding factor (`0` = automatic). A fixed
    /// factor must be at least `⌈(m+1)/2⌉` for every order it is used with.
    pub fn with_padding(grid: &Grid, mode: ConvolutionMode, padding: usize) -> Result<Self> {
        if mode == ConvolutionMode::DirectOracle && grid.n > DIRECT_MAX_N {
            return invalid(format!(
                "direct convolution is limited to {DIRECT_MAX_N}^d nodes, grid has {}^{}",
                grid.n, grid.d
            ));
        }
        Ok(Convolver {
            grid: grid.clone(),
            mode,
            padding,
            ffts: HashMap::new(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mode(&self) -> ConvolutionMode {
        self.mode
    }

    /// `F(Û) = Σ_m F^{(m)}(Û,…,Û)` of a field.
    pub fn apply(&mut self, nl: &Nonlinearity, field: &ModalField) -> Result<ModalField> {
        self.check(field)?;
        let mut out = ModalField::zeros(&field.grid, field.ncomp, field.frame);
        self.apply_into(nl, &field.data, field.ncomp, &mut out.data)?;
        Ok(out)
    }

    /// Raw-data version of [`Convolver::apply`]: accumulates into `out`.
    pub fn apply_into(
        &mut self,
        nl: &Nonlinearity,
        data: &[Complex64],
        ncomp: usize,
        out: &mut [Complex64],
    ) -> Result<()> {
        for term in &nl.terms {
            let args = vec![data; term.order];
            self.accumulate(term, &args, ncomp, out)?;
        }
        Ok(())
    }

    /// Multilinear form `F^{(m)}(Û₁,…,Û_m)` with one field per argument slot.
    pub fn apply_multilinear(
        &mut self,
        chi: &Susceptibility,
        fields: &[&ModalField],
    ) -> Result<ModalField> {
        if fields.len() != chi.order {
            return invalid(format!(
                "{} fields supplied for an order-{} susceptibility",
                fields.len(),
                chi.order
            ));
        }
        for f in fields {
            self.check(f)?;
        }
        let ncomp = fields[0].ncomp;
        if fields.iter().any(|f| f.ncomp != ncomp) {
            return Err(WavepaxError::GridMismatch(
                "argument fields differ in component count".into(),
            ));
        }
        let mut out = ModalField::zeros(&self.grid, ncomp, fields[0].frame);
        let args: Vec<&[Complex64]> = fields.iter().map(|f| f.data.as_slice()).collect();
        self.accumulate(chi, &args, ncomp, &mut out.data)?;
        Ok(out)
    }

    fn check(&self, field: &ModalField) -> Result<()> {
        if field.grid != self.grid {
            return Err(WavepaxError::GridMismatch(
                "field grid differs from the convolver grid".into(),
            ));
        }
        Ok(())
    }

    /// Adds `χ(args…)` to `out` (components-major raw arrays).
    pub fn accumulate(
        &mut self,
        chi: &Susceptibility,
        args: &[&[Complex64]],
        ncomp: usize,
        out: &mut [Complex64],
    ) -> Result<()> {
        chi.validate(ncomp)?;
        let len = self.grid.len();
        if args.len() != chi.order
            || args.iter().any(|a| a.len() != ncomp * len)
            || out.len() != ncomp * len
        {
            return Err(WavepaxError::GridMismatch(
                "convolution argument shapes".into(),
            ));
        }
        if chi.monomials.is_empty() {
            return Ok(());
        }
        match (self.mode, &chi.kernel) {
            (ConvolutionMode::Fft, None) => self.accumulate_fft(chi, args, out),
            (ConvolutionMode::Fft, Some(_)) => {
                invalid("susceptibilities with a kernel require the direct convolution mode")
            }
            (ConvolutionMode::DirectOracle, _) => {
                accumulate_direct(&self.grid, chi, args, out);
                Ok(())
            }
        }
    }

    fn accumulate_fft(
        &mut self,
        chi: &Susceptibility,
        args: &[&[Complex64]],
        out: &mut [Complex64],
    ) -> Result<()> {
        let grid = &self.grid;
        let (n, d, m) = (grid.n, grid.d, chi.order);
        let len = grid.len();
        let need = (m + 1).div_ceil(2);
        if self.padding != 0 && self.padding < need {
            return invalid(format!(
                "padding factor {} is below ⌈(m+1)/2⌉ = {need} for order {m}",
                self.padding
            ));
        }
        let pad = self.padding.max(need) * n;
        let plen = pad.pow(d as u32);
        let fft = self.ffts.entry(pad).or_insert_with(|| NdFft::new(pad, d));
        // canonical argument ids: identical slices share transforms
        let ids: Vec<usize> = (0..m)
            .map(|i| {
                (0..=i)
                    .find(|&j| std::ptr::eq(args[j].as_ptr(), args[i].as_ptr()))
                    .unwrap()
            })
            .collect();
        let padded_flat = |idx: usize| -> usize {
            if d == 1 {
                idx
            } else {
                (idx / n) * pad + idx % n
            }
        };
        let mut cache: HashMap<(usize, usize), Vec<Complex64>> = HashMap::new();
        let mut acc: HashMap<usize, Vec<Complex64>> = HashMap::new();
        for mono in &chi.monomials {
            for (slot, &comp) in mono.inputs.iter().enumerate() {
                let key = (ids[slot], comp);
                cache.entry(key).or_insert_with(|| {
                    let mut buf = vec![Complex64::new(0.0, 0.0); plen];
                    let src = &args[slot][comp * len..(comp + 1) * len];
                    for (idx, v) in src.iter().enumerate() {
                        buf[padded_flat(idx)] = *v;
                    }
                    fft.inverse(&mut buf);
                    buf
                });
            }
            let target = acc
                .entry(mono.out)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); plen]);
            let coef = mono.coefficient();
            let factors: Vec<&Vec<Complex64>> = mono
                .inputs
                .iter()
                .enumerate()
                .map(|(slot, &comp)| &cache[&(ids[slot], comp)])
                .collect();
            for p in 0..plen {
                let mut prod = coef;
                for f in &factors {
                    prod *= f[p];
                }
                target[p] += prod;
            }
        }
        let scale = (grid.dk() / (2.0 * PI)).powi(((m - 1) * d) as i32) / plen as f64;
        let shift = (m - 1) * n / 2;
        let mut outs: Vec<_> = acc.into_iter().collect();
        outs.sort_by_key(|(c, _)| *c);
        for (c, mut buf) in outs {
            fft.forward(&mut buf);
            for idx in 0..len {
                let q = if d == 1 {
                    idx + shift
                } else {
                    (idx / n + shift) * pad + idx % n + shift
                };
                out[c * len + idx] += buf[q] * scale;
            }
        }
        Ok(())
    }
}

impl Convolver {
    /// Batched decorated terms: for every group `g`, adds
    /// `Σ_{t ∈ groups[g]} χ(fields[t₁], …, fields[t_m])` to `outs[g]`.
    ///
    /// Each argument field component is transformed to r-space at most once
    /// for all groups, and monomials touching an identically zero component
    /// are skipped. Every output costs one forward transform per component.
    pub fn accumulate_groups(
        &mut self,
        chi: &Susceptibility,
        fields: &[&[Complex64]],
        ncomp: usize,
        groups: &[Vec<Vec<usize>>],
        outs: &mut [Vec<Complex64>],
    ) -> Result<()> {
        chi.validate(ncomp)?;
        let len = self.grid.len();
        if fields.iter().any(|f| f.len() != ncomp * len)
            || outs.len() != groups.len()
            || outs.iter().any(|o| o.len() != ncomp * len)
        {
            return Err(WavepaxError::GridMismatch(
                "convolution argument shapes".into(),
            ));
        }
        if groups
            .iter()
            .flatten()
            .any(|t| t.len() != chi.order || t.iter().any(|&f| f >= fields.len()))
        {
            return invalid(
                "decorated term does not match the susceptibility order or the field list",
            );
        }
        if chi.monomials.is_empty() {
            return Ok(());
        }
        let nonzero: Vec<Vec<bool>> = fields
            .iter()
            .map(|f| {
                (0..ncomp)
                    .map(|c| {
                        f[c * len..(c + 1) * len]
                            .iter()
                            .any(|z| z.re != 0.0 || z.im != 0.0)
                    })
                    .collect()
            })
            .collect();
        let live =
            |t: &[usize], inputs: &[usize]| t.iter().zip(inputs).all(|(&f, &c)| nonzero[f][c]);
        match (self.mode, &chi.kernel) {
            (ConvolutionMode::Fft, Some(_)) => {
                invalid("susceptibilities with a kernel require the direct convolution mode")
            }
            (ConvolutionMode::DirectOracle, _) => {
                for (group, out) in groups.iter().zip(outs.iter_mut()) {
                    for t in group {
                        if chi.monomials.iter().any(|mo| live(t, &mo.inputs)) {
                            let args: Vec<&[Complex64]> = t.iter().map(|&f| fields[f]).collect();
                            accumulate_direct(&self.grid, chi, &args, out);
                        }
                    }
                }
                Ok(())
            }
            (ConvolutionMode::Fft, None) => {
                let grid = self.grid.clone();
                let (n, d, m) = (grid.n, grid.d, chi.order);
                let need = (m + 1).div_ceil(2);
                if self.padding != 0 && self.padding < need {
                    return invalid(format!(
                        "padding factor {} is below ⌈(m+1)/2⌉ = {need} for order {m}",
                        self.padding
                    ));
                }
                let pad = self.padding.max(need) * n;
                let plen = pad.pow(d as u32);
                let fft = self.ffts.entry(pad).or_insert_with(|| NdFft::new(pad, d));
                let padded_flat = |idx: usize| -> usize {
                    if d == 1 {
                        idx
                    } else {
                        (idx / n) * pad + idx % n
                    }
                };
                let mut cache: HashMap<(usize, usize), Vec<Complex64>> = HashMap::new();
                let scale = (grid.dk() / (2.0 * PI)).powi(((m - 1) * d) as i32) / plen as f64;
                let shift = (m - 1) * n / 2;
                for (group, out) in groups.iter().zip(outs.iter_mut()) {
                    let mut acc: HashMap<usize, Vec<Complex64>> = HashMap::new();
                    for t in group {
                        for mono in &chi.monomials {
                            if !live(t, &mono.inputs) {
                                continue;
                            }
                            for (&f, &c) in t.iter().zip(&mono.inputs) {
                                cache.entry((f, c)).or_insert_with(|| {
                                    let mut buf = vec![Complex64::new(0.0, 0.0); plen];
                                    for (idx, v) in
                                        fields[f][c * len..(c + 1) * len].iter().enumerate()
                                    {
                                        buf[padded_flat(idx)] = *v;
                                    }
                                    fft.inverse(&mut buf);
                                    buf
                                });
                            }
                            let factors: Vec<&Vec<Complex64>> = t
                                .iter()
                                .zip(&mono.inputs)
                                .map(|(&f, &c)| &cache[&(f, c)])
                                .collect();
                            let target = acc
                                .entry(mono.out)
                                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); plen]);
                            let coef = mono.coefficient();
                            for p in 0..plen {
                                let mut prod = coef;
                                for fa in &factors {
                                    prod *= fa[p];
                                }
                                target[p] += prod;
                            }
                        }
                    }
                    let mut comps: Vec<_> = acc.into_iter().collect();
                    comps.sort_by_key(|(c, _)| *c);
                    for (c, mut buf) in comps {
                        fft.forward(&mut buf);
                        for idx in 0..len {
                            let q = if d == 1 {
                                idx + shift
                            } else {
                                (idx / n + shift) * pad + idx % n + shift
                            };
                            out[c * len + idx] += buf[q] * scale;
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// Literal `(m−1)d`-fold convolution sum.
fn accumulate_direct(
    grid: &Grid,
    chi: &Susceptibility,
    args: &[&[Complex64]],
    out: &mut [Complex64],
) {
    let (n, d, m) = (grid.n, grid.d, chi.order);
    let len = grid.len();
    let scale = (grid.dk() / (2.0 * PI)).powi(((m - 1) * d) as i32);
    let shift = ((m - 1) * n / 2) as isize;
    let total = len.pow((m - 1) as u32);
    let mut ks: Vec<Vec<f64>> = vec![vec![0.0; d]; m];
    let mut nodes = vec![0usize; m];
    for mono in &chi.monomials {
        let coef = mono.coefficient() * scale;
        for oidx in 0..len {
            let om = grid.multi(oidx);
            let mut sum = Complex64::new(0.0, 0.0);
            for t in 0..total {
                let mut rest = t;
                let mut acc = [0isize; 2];
                for node in nodes.iter_mut().take(m - 1) {
                    *node = rest % len;
                    rest /= len;
                    let mm = grid.multi(*node);
                    acc[0] += mm[0] as isize;
                    acc[1] += mm[1] as isize;
                }
                let mut last = [0usize; 2];
                let mut inside = true;
                for a in 0..d {
                    let j = om[a] as isize + shift - acc[a];
                    if j < 0 || j >= n as isize {
                        inside = false;
                    } else {
                        last[a] = j as usize;
                    }
                }
                if !inside {
                    continue;
                }
                nodes[m - 1] = grid.flat(last);
                let mut prod = Complex64::new(1.0, 0.0);
                for (slot, &comp) in mono.inputs.iter().enumerate() {
                    prod *= args[slot][comp * len + nodes[slot]];
                    if prod == Complex64::new(0.0, 0.0) {
                        break;
                    }
                }
                if prod == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if let Some(kernel) = &chi.kernel {
                    for (slot, kk) in ks.iter_mut().enumerate() {
                        *kk = grid.k_at(nodes[slot]);
                    }
                    let refs: Vec<&[f64]> = ks.iter().map(|v| v.as_slice()).collect();
                    prod *= kernel(&grid.k_at(oidx), &refs);
                }
                sum += prod;
            }
            out[mono.out * len + oidx] += coef * sum;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::susceptibility::Monomial;
    use crate::wavepacket::{Frame, GridTransform};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_field(grid: &Grid, ncomp: usize, seed: u64) -> ModalField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..ncomp * grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ModalField::from_data(grid, ncomp, Frame::Fast, data).unwrap()
    }

    #[test]
    fn product_of_deltas() {
        let grid = Grid::new(1, 32, 4.0).unwrap();
        let chi = Susceptibility::constant(
            2,
            vec![Monomial::new(0, Complex64::new(1.0, 0.0), vec![0, 0])],
        )
        .unwrap();
        let (j1, j2) = (18, 20); // k = 0.5, 1.0
        let mut u1 = ModalField::zeros(&grid, 1, Frame::Fast);
        let mut u2 = ModalField::zeros(&grid, 1, Frame::Fast);
        let (a, b) = (Complex64::new(2.0, 1.0), Complex64::new(-0.5, 3.0));
        u1.data[j1] = a;
        u2.data[j2] = b;
        for mode in [ConvolutionMode::Fft, ConvolutionMode::DirectOracle] {
            let mut conv = Convolver::new(&grid, mode).unwrap();
            let out = conv.apply_multilinear(&chi, &[&u1, &u2]).unwrap();
            let target = grid.nearest_index(&[1.5]).unwrap();
            let want = a * b * grid.dk() / (2.0 * PI);
            for (idx, v) in out.data.iter().enumerate() {
                let w = if idx == target {
                    want
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((v - w).norm() < 1e-14, "{mode:?} idx {idx}");
            }
        }
    }

    #[test]
    fn fft_matches_direct_oracle() {
        for (d, n) in [(1, 16), (2, 8)] {
            let grid = Grid::new(d, n, 3.0).unwrap();
            let u = random_field(&grid, 2, 7);
            let v = random_field(&grid, 2, 8);
            let w = random_field(&grid, 2, 9);
            for nl in [
                Nonlinearity::kerr(1.3),
                Nonlinearity::power_real(2, 0.7).unwrap(),
                Nonlinearity::power_real(4, 0.2).unwrap(),
            ] {
                let mut f = Convolver::new(&grid, ConvolutionMode::Fft).unwrap();
                let mut o = Convolver::new(&grid, ConvolutionMode::DirectOracle).unwrap();
                let a = f.apply(&nl, &u).unwrap();
                let b = o.apply(&nl, &u).unwrap();
                let scale = b.max_abs().max(1e-300);
                for (x, y) in a.data.iter().zip(&b.data) {
                    assert!(
                        (x - y).norm() <= 1e-12 * scale,
                        "d={d} order {}",
                        nl.max_order()
                    );
                }
            }
            let chi = Nonlinearity::kerr(1.0).terms[0].clone();
            let mut f = Convolver::new(&grid, ConvolutionMode::Fft).unwrap();
            let mut o = Convolver::new(&grid, ConvolutionMode::DirectOracle).unwrap();
            let a = f.apply_multilinear(&chi, &[&u, &v, &w]).unwrap();
            let b = o.apply_multilinear(&chi, &[&u, &v, &w]).unwrap();
            let scale = b.max_abs();
            for (x, y) in a.data.iter().zip(&b.data) {
                assert!((x - y).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn grouped_terms_match_individual_multilinear_sums() {
        let grid = Grid::new(1, 16, 3.0).unwrap();
        let u = random_field(&grid, 2, 3);
        let mut v = random_field(&grid, 2, 4);
        for z in v.comp_mut(1) {
            *z = Complex64::new(0.0, 0.0);
        }
        let w = random_field(&grid, 2, 5);
        let fields = [&u, &v, &w];
        let raw: Vec<&[Complex64]> = fields.iter().map(|f| f.data.as_slice()).collect();
        let chi = Nonlinearity::kerr(0.8).terms[0].clone();
        let groups = vec![
            vec![vec![0, 1, 2], vec![1, 1, 0]],
            vec![vec![2, 2, 2]],
            vec![],
        ];
        for mode in [ConvolutionMode::Fft, ConvolutionMode::DirectOracle] {
            let mut conv = Convolver::new(&grid, mode).unwrap();
            let mut outs = vec![vec![Complex64::new(0.0, 0.0); 32]; 3];
            conv.accumulate_groups(&chi, &raw, 2, &groups, &mut outs)
                .unwrap();
            let mut oracle = Convolver::new(&grid, ConvolutionMode::DirectOracle).unwrap();
            for (g, out) in groups.iter().zip(&outs) {
                let mut want = ModalField::zeros(&grid, 2, Frame::Fast);
                for t in g {
                    let f = oracle
                        .apply_multilinear(&chi, &[fields[t[0]], fields[t[1]], fields[t[2]]])
                        .unwrap();
                    want.add_assign(&f).unwrap();
                }
                let scale = want.max_abs().max(1.0);
                for (x, y) in out.iter().zip(&want.data) {
                    assert!((x - y).norm() <= 1e-12 * scale, "{mode:?}");
                }
            }
        }
        let mut conv = Convolver::new(&grid, ConvolutionMode::Fft).unwrap();
        let mut outs = vec![vec![Complex64::new(0.0, 0.0); 32]; 1];
        assert!(conv
            .accumulate_groups(&chi, &raw, 2, &[vec![vec![0, 1]]], &mut outs)
            .is_err());
    }

    #[test]
    fn cubic_matches_r_space_product() {
        // Band-limited field: the cubic product stays inside the grid, so the
        // convolution equals the transform of the pointwise product.
        let grid = Grid::new(1, 256, 8.0).unwrap();
        let mut t = GridTransform::new(&grid);
        let mut u = ModalField::zeros(&grid, 2, Frame::Fast);
        for idx in 0..grid.len() {
            let k = grid.k_at(idx)[0];
            let g = Complex64::new((-(k - 1.0).powi(2) / 0.1).exp(), 0.0);
            u.data[idx] = g;
            u.data[grid.len() + grid.neg_index(idx)] = g.conj();
        }
        let q = 0.8;
        let mut conv = Convolver::new(&grid, ConvolutionMode::Fft).unwrap();
        let f = conv.apply(&Nonlinearity::kerr(q), &u).unwrap();
        let ur = u.to_r_space(&mut t);
        let len = grid.len();
        let mut want: Vec<Complex64> = (0..len)
            .map(|p| Complex64::new(0.0, q) * ur[p] * ur[p] * ur[len + p])
            .collect();
        t.to_k(&mut want);
        let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for idx in 0..len {
            assert!((f.data[idx] - want[idx]).norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn kernel_requires_direct_mode() {
        let grid = Grid::new(1, 16, 2.0).unwrap();
        let kernel: crate::evolution::susceptibility::KernelFn =
            Arc::new(|k: &[f64], _ks: &[&[f64]]| Complex64::new(k[0], 0.0));
        let chi = Susceptibility::with_kernel(
            2,
            vec![Monomial::new(0, Complex64::new(1.0, 0.0), vec![0, 0])],
            kernel,
        )
        .unwrap();
        let u = random_field(&grid, 1, 3);
        assert!(Convolver::new(&grid, ConvolutionMode::Fft)
            .unwrap()
            .apply_multilinear(&chi, &[&u, &u])
            .is_err());
        let out = Convolver::new(&grid, ConvolutionMode::DirectOracle)
            .unwrap()
            .apply_multilinear(&chi, &[&u, &u])
            .unwrap();
        let plain = Susceptibility::constant(2, chi.monomials.clone()).unwrap();
        let base = Convolver::new(&grid, ConvolutionMode::Fft)
            .unwrap()
            .apply_multilinear(&plain, &[&u, &u])
            .unwrap();
        for idx in 0..grid.len() {
            assert!((out.data[idx] - base.data[idx] * grid.k_at(idx)[0]).norm() < 1e-12);
        }
        assert!(Convolver::new(
            &Grid::new(1, 128, 2.0).unwrap(),
            ConvolutionMode::DirectOracle
        )
        .is_err());
    }
}

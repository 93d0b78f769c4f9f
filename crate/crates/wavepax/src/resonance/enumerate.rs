//! Enumeration of resonance solutions, output spectra, resonance selection
//! and closure.

use super::spectrum::{cmp_k, dist, kappa, DecoratedIndex, NkPair, NkSpectrum};
use crate::dispersion::DispersionModel;
use crate::error::{Result, WavepaxError};
use crate::sign::Sign;
use serde::{Deserialize, Serialize};

/// Options shared by all resonance computations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceOptions {
    /// Interaction orders `M_F`.
    pub orders: Vec<usize>,
    /// Resonance tolerance; defaults to `1e-9(1 + max_l|ω_{n_l}(k_{*l})|)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_res: Option<f64>,
    /// Wavevector tolerance; defaults to `1e-9(1 + max|k_{*l}|)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_k: Option<f64>,
    /// Largest admissible number of pairs.
    #[serde(default = "default_cap_n")]
    pub cap_n: usize,
    /// Largest admissible interaction order.
    #[serde(default = "default_cap_m")]
    pub cap_m: usize,
    /// Closure iteration cap.
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_cap_n() -> usize {
    8
}
fn default_cap_m() -> usize {
    4
}
fn default_max_iter() -> usize {
    16
}

impl ResonanceOptions {
    /// Default options for the given orders.
    pub fn new(orders: &[usize]) -> Self {
        ResonanceOptions {
            orders: orders.to_vec(),
            tol_res: None,
            tol_k: None,
            cap_n: default_cap_n(),
            cap_m: default_cap_m(),
            max_iter: default_max_iter(),
        }
    }

    /// Effective `(tol_res, tol_k)` for a spectrum.
    pub fn tolerances(&self, spectrum: &NkSpectrum, model: &DispersionModel) -> (f64, f64) {
        (
            self.tol_res
                .unwrap_or_else(|| spectrum.default_tol_res(model)),
            self.tol_k.unwrap_or_else(|| spectrum.default_tol_k()),
        )
    }
}

/// Class of a resonance solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SolutionClass {
    /// Universal solution with the single nonzero `δ_{I₀}`; also internal.
    Universal { i0: usize },
    /// Internal solution landing on pair `i0 = I(λ)`.
    Internal { i0: usize },
    /// Output pair outside the spectrum.
    External,
}

impl SolutionClass {
    /// `I(λ)` for internal (including universal) solutions.
    pub fn internal_index(&self) -> Option<usize> {
        match *self {
            SolutionClass::Universal { i0 } | SolutionClass::Internal { i0 } => Some(i0),
            SolutionClass::External => None,
        }
    }

    pub fn is_universal(&self) -> bool {
        matches!(self, SolutionClass::Universal { .. })
    }
}

/// A solution `(m, ζ, n, λ)` of the resonance equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSolution {
    pub m: usize,
    pub zeta: Sign,
    pub n: usize,
    pub index: DecoratedIndex,
    pub delta: Vec<i64>,
    /// `κ_m(λ)`.
    pub kappa: Vec<f64>,
    /// `|Ω|` achieved.
    pub omega_residual: f64,
    pub class: SolutionClass,
}

impl ResonanceSolution {
    /// The output pair `(n, ζκ)`.
    pub fn output(&self) -> NkPair {
        NkPair::new(
            self.n,
            self.kappa.iter().map(|x| self.zeta.f() * x).collect(),
        )
    }
}

/// A candidate whose output wavevector is a band-crossing point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedOutput {
    pub m: usize,
    pub zeta: Sign,
    pub n: usize,
    pub index: DecoratedIndex,
    pub kappa: Vec<f64>,
    /// `|Ω|` when the bands can still be evaluated there (scalar models).
    pub residual: Option<f64>,
}

/// Outcome of an enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub solutions: Vec<ResonanceSolution>,
    pub skipped: Vec<SkippedOutput>,
    pub tol_res: f64,
    pub tol_k: f64,
}

impl Enumeration {
    /// Skipped outputs that may be resonant (residual unknown or within
    /// tolerance).
    pub fn blocking_skips(&self) -> Vec<&SkippedOutput> {
        self.skipped
            .iter()
            .filter(|s| s.residual.is_none_or(|r| r <= self.tol_res))
            .collect()
    }
}

fn check_caps(spectrum: &NkSpectrum, opts: &ResonanceOptions) -> Result<()> {
    if spectrum.len() > opts.cap_n {
        return Err(WavepaxError::EnumerationCapExceeded(format!(
            "spectrum has {} pairs, cap is {}",
            spectrum.len(),
            opts.cap_n
        )));
    }
    if let Some(&m) = opts.orders.iter().find(|&&m| m > opts.cap_m || m == 0) {
        return Err(WavepaxError::EnumerationCapExceeded(format!(
            "order {m} outside 1..={}",
            opts.cap_m
        )));
    }
    Ok(())
}

/// Enumerates all `(m, ζ, n, λ)` with `|−ω_{n,ζ}(κ_m(λ)) + Ω_{1,m}(λ)| ≤ tol_res`
/// (equivalently `|−ζω_n(ζκ) + Ω_{1,m}| ≤ tol_res` for symmetric bands),
/// classifying each as universal, internal or external. Outputs on the
/// band-crossing set are recorded in `skipped`. Solutions are sorted
/// lexicographically in `(m, ζ, n, λ)`.
pub fn enumerate_solutions(
    spectrum: &NkSpectrum,
    model: &DispersionModel,
    opts: &ResonanceOptions,
) -> Result<Enumeration> {
    spectrum.check_against(model)?;
    check_caps(spectrum, opts)?;
    let (tol_res, tol_k) = opts.tolerances(spectrum, model);
    let n_pairs = spectrum.len();
    // ω_{n_l,ζ}(ζk_{*l}) per pair and sign
    let mut w = vec![[0.0f64; 2]; n_pairs];
    for (l, p) in spectrum.pairs.iter().enumerate() {
        for (s, z) in Sign::BOTH.iter().enumerate() {
            let zk: Vec<f64> = p.k.iter().map(|x| z.f() * x).collect();
            w[l][s] = model.eval_omega(p.n, *z, &zk).map_err(|_| {
                WavepaxError::SpectrumOnSingularSet {
                    index: l + 1,
                    k: zk,
                }
            })?;
        }
    }
    let mut orders = opts.orders.clone();
    orders.sort_unstable();
    orders.dedup();
    let mut solutions = Vec::new();
    let mut skipped = Vec::new();
    if n_pairs == 0 {
        return Ok(Enumeration {
            solutions,
            skipped,
            tol_res,
            tol_k,
        });
    }
    for &m in &orders {
        for index in DecoratedIndex::all(m, n_pairs) {
            let kap = kappa(&index, spectrum);
            let omega1: f64 = index
                .entries
                .iter()
                .map(|&(z, l)| w[l - 1][if z == Sign::Plus { 0 } else { 1 }])
                .sum();
            let eig = model.eigen(&kap);
            for zeta in Sign::BOTH {
                for n in 1..=model.j {
                    let c = model.slot(n, zeta)?;
                    match &eig {
                        Ok(e) => {
                            let res = (-e.values[c] + omega1).abs();
                            if res <= tol_res {
                                let delta = index.delta(n_pairs);
                                let out: Vec<f64> = kap.iter().map(|x| zeta.f() * x).collect();
                                let class = match spectrum.find(n, &out, tol_k) {
                                    None => SolutionClass::External,
                                    Some(i0) => {
                                        let nz: Vec<usize> =
                                            (0..n_pairs).filter(|&l| delta[l] != 0).collect();
                                        if nz.len() == 1
                                            && nz[0] + 1 == i0
                                            && delta[nz[0]] == zeta.value()
                                            && spectrum.pair(i0).n == n
                                        {
                                            SolutionClass::Universal { i0 }
                                        } else {
                                            SolutionClass::Internal { i0 }
                                        }
                                    }
                                };
                                solutions.push(ResonanceSolution {
                                    m,
                                    zeta,
                                    n,
                                    index: index.clone(),
                                    delta,
                                    kappa: kap.clone(),
                                    omega_residual: res,
                                    class,
                                });
                            }
                        }
                        Err(_) => {
                            let residual = model
                                .eigen_raw(&kap)
                                .ok()
                                .map(|e| (-e.values[c] + omega1).abs());
                            skipped.push(SkippedOutput {
                                m,
                                zeta,
                                n,
                                index: index.clone(),
                                kappa: kap.clone(),
                                residual,
                            });
                        }
                    }
                }
            }
        }
    }
    solutions.sort_by(|a, b| {
        (a.m, a.zeta, a.n)
            .cmp(&(b.m, b.zeta, b.n))
            .then_with(|| a.index.cmp(&b.index))
    });
    Ok(Enumeration {
        solutions,
        skipped,
        tol_res,
        tol_k,
    })
}

/// Output nk-spectrum `[S]_out`: every `κ_m(λ)`, `m ∈ M_F`, crossed with all
/// bands `1..=J`, deduplicated under `tol_k` and sorted by `(k, n)`.
pub fn output_spectrum(
    spectrum: &NkSpectrum,
    j: usize,
    orders: &[usize],
    tol_k: f64,
) -> Vec<NkPair> {
    let mut ks: Vec<Vec<f64>> = Vec::new();
    if !spectrum.is_empty() {
        for &m in orders {
            for index in DecoratedIndex::all(m, spectrum.len()) {
                let k = kappa(&index, spectrum);
                if !ks.iter().any(|q| dist(q, &k) <= tol_k) {
                    ks.push(k);
                }
            }
        }
    }
    ks.sort_by(|a, b| cmp_k(a, b));
    let mut out = Vec::new();
    for k in ks {
        for n in 1..=j {
            out.push(NkPair::new(n, k.clone()));
        }
    }
    out
}

/// Resonant output spectrum `[S]_out^res`: the outputs `(n, ζκ)` of all
/// solutions, deduplicated and sorted by `(k, n)`.
pub fn resonant_outputs(enumeration: &Enumeration) -> Vec<NkPair> {
    let mut out: Vec<NkPair> = Vec::new();
    for s in &enumeration.solutions {
        let p = s.output();
        if !out.iter().any(|q| q.approx_eq(&p, enumeration.tol_k)) {
            out.push(p);
        }
    }
    out.sort_by(|a, b| cmp_k(&a.k, &b.k).then(a.n.cmp(&b.n)));
    out
}

/// `R(S) = S ∪ [S]_out^res`: the pairs of `S` in their order followed by the
/// new resonant outputs.
pub fn select_from(spectrum: &NkSpectrum, enumeration: &Enumeration) -> NkSpectrum {
    let mut pairs = spectrum.pairs.clone();
    for p in resonant_outputs(enumeration) {
        if !pairs.iter().any(|q| q.approx_eq(&p, enumeration.tol_k)) {
            pairs.push(p);
        }
    }
    NkSpectrum { pairs }
}

/// Resonance selection `R(S)`.
pub fn resonance_select(
    spectrum: &NkSpectrum,
    model: &DispersionModel,
    opts: &ResonanceOptions,
) -> Result<NkSpectrum> {
    let e = enumerate_solutions(spectrum, model, opts)?;
    Ok(select_from(spectrum, &e))
}

/// Result of iterating the resonance selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Closure {
    pub spectrum: NkSpectrum,
    pub converged: bool,
    /// Applications of `R`, including the one confirming the fixed point.
    pub iterations: usize,
}

/// Iterates `R` until a fixed point (set equality under `tol_k`) or
/// `opts.max_iter` applications. Aborts with `BandCrossingAtOutput` when a
/// possibly resonant output falls on the band-crossing set.
pub fn closure(
    spectrum: &NkSpectrum,
    model: &DispersionModel,
    opts: &ResonanceOptions,
) -> Result<Closure> {
    if opts.max_iter == 0 {
        return crate::error::invalid("closure needs max_iter ≥ 1");
    }
    let mut cur = spectrum.clone();
    for it in 1..=opts.max_iter {
        let e = enumerate_solutions(&cur, model, opts)?;
        if let Some(s) = e.blocking_skips().first() {
            return Err(WavepaxError::BandCrossingAtOutput {
                k: s.kappa.iter().map(|x| s.zeta.f() * x).collect(),
            });
        }
        let next = select_from(&cur, &e);
        if next.set_eq(&cur, e.tol_k) {
            return Ok(Closure {
                spectrum: cur,
                converged: true,
                iterations: it,
            });
        }
        cur = next;
    }
    Ok(Closure {
        spectrum: cur,
        converged: false,
        iterations: opts.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_no_shg() {
        let m = DispersionModel::quadratic(1, 1.0, 1.0).unwrap();
        let s = NkSpectrum::from_1d(&[(1, 1.0)]).unwrap();
        let e = enumerate_solutions(&s, &m, &ResonanceOptions::new(&[2])).unwrap();
        assert!(e.solutions.is_empty());
        assert!(resonance_select(&s, &m, &ResonanceOptions::new(&[2]))
            .unwrap()
            .set_eq(&s, 1e-9));
        let out = output_spectrum(&s, 1, &[2], 1e-9);
        let ks: Vec<f64> = out.iter().map(|p| p.k[0]).collect();
        assert_eq!(ks, vec![-2.0, 0.0, 2.0]);
        assert!(output_spectrum(&s, 1, &[], 1e-9).is_empty());
    }

    #[test]
    fn quad_shg_closure() {
        let m = DispersionModel::quadratic(1, 1.0, 2.0).unwrap();
        let s = NkSpectrum::from_1d(&[(1, 1.0)]).unwrap();
        let opts = ResonanceOptions::new(&[2]);
        let e = enumerate_solutions(&s, &m, &opts).unwrap();
        let ext: Vec<_> = e
            .solutions
            .iter()
            .filter(|x| x.zeta == Sign::Plus)
            .collect();
        assert_eq!(ext.len(), 1);
        assert_eq!(ext[0].delta, vec![2]);
        assert_eq!(ext[0].kappa, vec![2.0]);
        assert_eq!(ext[0].class, SolutionClass::External);
        let c = closure(&s, &m, &opts).unwrap();
        assert!(c.converged);
        assert_eq!(c.iterations, 2);
        assert!(c
            .spectrum
            .set_eq(&NkSpectrum::from_1d(&[(1, 1.0), (1, 2.0)]).unwrap(), 1e-9));
    }

    #[test]
    fn band_crossing_output_aborts_closure() {
        // ω = k²: the output κ = 0 of λ = ((+,1),(−,1)) is band-crossing
        let m = DispersionModel::quadratic(1, 1.0, 0.0).unwrap();
        let s = NkSpectrum::from_1d(&[(1, 1.0)]).unwrap();
        let opts = ResonanceOptions::new(&[2]);
        let e = enumerate_solutions(&s, &m, &opts).unwrap();
        assert!(!e.skipped.is_empty());
        assert!(matches!(
            closure(&s, &m, &opts),
            Err(WavepaxError::BandCrossingAtOutput { .. })
        ));
    }

    #[test]
    fn caps() {
        let m = DispersionModel::quadratic(1, 1.0, 1.0).unwrap();
        let s = NkSpectrum::from_1d(&[(1, 1.0)]).unwrap();
        assert!(matches!(
            enumerate_solutions(&s, &m, &ResonanceOptions::new(&[5])),
            Err(WavepaxError::EnumerationCapExceeded(_))
        ));
    }
}

//! Wavepacket construction and the regularity defect.

use super::cutoff::{build_cutoff, psi_at};
use super::envelope::Envelope;
use super::field::{Frame, ModalField};
use super::grid::Grid;
use crate::dispersion::{Conjugation, DispersionModel, SymbolTable};
use crate::error::{invalid, Result, WavepaxError};
use crate::sign::Sign;
use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Declarative description of a (doublet) wavepacket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavepacketSpec {
    /// Band index `n` (1-based).
    pub n: usize,
    /// Principal wavevector `k*`.
    pub k_star: Vec<f64>,
    /// Position `r*` (in r units).
    #[serde(default)]
    pub r_star: Vec<f64>,
    /// Localization parameter `0 < β < 1`.
    pub beta: f64,
    /// Cutoff exponent `0 < ε < 1`; the cutoff radius is `β^{1−ε}`.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub envelope: Envelope,
    /// Which of the `ζ = ±` components are present.
    #[serde(default = "default_components")]
    pub zeta_components: Vec<Sign>,
    /// Build the `−` component from the `+` component by the reality
    /// relation `ĥ₋(k) = C conj(ĥ₊(−k))`, making the r-space field real.
    #[serde(default = "default_true")]
    pub doublet_reality: bool,
    /// Optional polarization vector `g` (re, im pairs; length `2J`). Defaults
    /// to the eigenvector of `(n, ζ)` at `ζk*`.
    #[serde(default)]
    pub polarization: Option<Vec<[f64; 2]>>,
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_components() -> Vec<Sign> {
    vec![Sign::Plus, Sign::Minus]
}

fn default_true() -> bool {
    true
}

impl WavepacketSpec {
    /// Real doublet with a gaussian envelope at `r* = 0`.
    pub fn gaussian(n: usize, k_star: Vec<f64>, beta: f64, width: f64) -> Self {
        let d = k_star.len();
        WavepacketSpec {
            n,
            k_star,
            r_star: vec![0.0; d],
            beta,
            epsilon: default_epsilon(),
            envelope: Envelope::gaussian(width, 1.0),
            zeta_components: default_components(),
            doublet_reality: true,
            polarization: None,
        }
    }

    /// Builder: position.
    pub fn at(mut self, r_star: Vec<f64>) -> Self {
        self.r_star = r_star;
        self
    }

    /// Builder: only the listed components.
    pub fn components(mut self, zetas: &[Sign]) -> Self {
        self.zeta_components = zetas.to_vec();
        self
    }

    /// Cutoff radius `β^{1−ε}`.
    pub fn cutoff_radius(&self) -> f64 {
        self.beta.powf(1.0 - self.epsilon)
    }

    /// Position vector, defaulting to the origin.
    pub fn position(&self) -> Vec<f64> {
        if self.r_star.is_empty() {
            vec![0.0; self.k_star.len()]
        } else {
            self.r_star.clone()
        }
    }

    /// Checks the parameter ranges against `model` and `grid`.
    pub fn validate(&self, model: &DispersionModel, grid: &Grid) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return invalid(format!("β = {} outside (0, 1)", self.beta));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return invalid(format!("ε = {} outside (0, 1)", self.epsilon));
        }
        if self.k_star.len() != grid.d || model.d != grid.d {
            return invalid("k* dimension does not match the grid");
        }
        if !self.r_star.is_empty() && self.r_star.len() != grid.d {
            return invalid("r* dimension does not match the grid");
        }
        if self.zeta_components.is_empty() {
            return invalid("wavepacket has no components");
        }
        if !(self.envelope.width > 0.0) {
            return invalid("envelope width must be positive");
        }
        model.slot(self.n, Sign::Plus)?;
        for &z in &self.zeta_components {
            let kz: Vec<f64> = self.k_star.iter().map(|x| z.f() * x).collect();
            if !grid.contains(&kz) {
                return invalid(format!("ζk* = {kz:?} outside the grid"));
            }
        }
        if model.is_band_crossing(&self.k_star) {
            return Err(WavepaxError::SpectrumOnSingularSet {
                index: 1,
                k: self.k_star.clone(),
            });
        }
        let limit = 4.0 * grid.dk();
        if self.beta * self.envelope.width < limit {
            return Err(WavepaxError::EnvelopeUnderresolved {
                width: self.beta * self.envelope.width,
                limit,
            });
        }
        if self.cutoff_radius() < limit {
            return Err(WavepaxError::RadiusUnresolvable {
                radius: self.cutoff_radius(),
                dk: grid.dk(),
            });
        }
        Ok(())
    }

    /// Checks `β^{1/2} ≤ π₀`, the band-neighbourhood condition.
    pub fn check_pi0(&self, pi0: f64) -> Result<()> {
        if self.beta.sqrt() > pi0 {
            return Err(WavepaxError::HypothesisViolated(format!(
                "β^(1/2) = {:.4} exceeds the band-neighbourhood radius π₀ = {pi0:.4}",
                self.beta.sqrt()
            )));
        }
        Ok(())
    }
}

/// Polarization vector for the `ζ` component.
fn polarization(
    spec: &WavepacketSpec,
    model: &DispersionModel,
    zeta: Sign,
) -> Result<DVector<Complex64>> {
    let ncomp = model.ncomp();
    if let Some(g) = &spec.polarization {
        if g.len() != ncomp {
            return invalid(format!(
                "polarization has {} entries, expected {ncomp}",
                g.len()
            ));
        }
        let v = DVector::from_iterator(ncomp, g.iter().map(|p| Complex64::new(p[0], p[1])));
        return Ok(match zeta {
            Sign::Plus => v,
            Sign::Minus => conjugate_vector(model, &v),
        });
    }
    let c = model.slot(spec.n, zeta)?;
    let kz: Vec<f64> = spec.k_star.iter().map(|x| zeta.f() * x).collect();
    let e = model.eigen(&kz)?;
    Ok(match &e.vectors {
        None => {
            let mut v = DVector::zeros(ncomp);
            v[c] = Complex64::new(1.0, 0.0);
            v
        }
        Some(m) => m.column(c).into_owned(),
    })
}

/// `C conj(v)` for the component layout of `model`.
fn conjugate_vector(model: &DispersionModel, v: &DVector<Complex64>) -> DVector<Complex64> {
    let ncomp = v.len();
    match model.conjugation() {
        Conjugation::Identity => v.map(|z| z.conj()),
        Conjugation::Swap => DVector::from_fn(ncomp, |r, _| v[(r + ncomp / 2) % ncomp].conj()),
    }
}

/// Builds the single-sign component `ĥ_ζ` (slow frame).
fn build_component(
    spec: &WavepacketSpec,
    model: &DispersionModel,
    grid: &Grid,
    zeta: Sign,
) -> Result<ModalField> {
    let ncomp = model.ncomp();
    let len = grid.len();
    let d = grid.d;
    let center: Vec<f64> = spec.k_star.iter().map(|x| zeta.f() * x).collect();
    let radius = spec.cutoff_radius();
    let cut = build_cutoff(grid, &center, radius)?;
    let g = polarization(spec, model, zeta)?;
    let c = model.slot(spec.n, zeta)?;
    let r_star = spec.position();
    let scale = spec.beta.powi(-(d as i32));
    let mut out = ModalField::zeros(grid, ncomp, Frame::Slow);
    let mut k = [0.0; 2];
    let mut kappa = [0.0; 2];
    for idx in 0..len {
        if cut[idx] == 0.0 {
            continue;
        }
        grid.k_into(idx, &mut k);
        for a in 0..d {
            kappa[a] = (k[a] - center[a]) / spec.beta;
        }
        let phase: f64 = (0..d).map(|a| k[a] * r_star[a]).sum();
        let amp = cut[idx] * scale * spec.envelope.hat(&kappa[..d]);
        let s = Complex64::from_polar(amp, -phase);
        let e = model.eigen(&k[..d])?;
        match &e.vectors {
            None => out.data[c * len + idx] = s * g[c],
            Some(m) => {
                let col = m.column(c);
                let proj: Complex64 = col.iter().zip(g.iter()).map(|(v, gi)| v.conj() * gi).sum();
                for r in 0..ncomp {
                    out.data[r * len + idx] = s * col[r] * proj;
                }
            }
        }
    }
    Ok(out)
}

/// Applies `ĥ ↦ C conj(ĥ(−k))` to a whole field.
pub fn conjugate_reflect(model: &DispersionModel, field: &ModalField) -> ModalField {
    let len = field.nodes();
    let ncomp = field.ncomp;
    let mut out = ModalField::zeros(&field.grid, ncomp, field.frame);
    for r in 0..ncomp {
        let src = match model.conjugation() {
            Conjugation::Identity => r,
            Conjugation::Swap => (r + ncomp / 2) % ncomp,
        };
        for idx in 0..len {
            out.data[r * len + idx] = field.data[src * len + field.grid.neg_index(idx)].conj();
        }
    }
    out
}

/// Builds the wavepacket of `spec` as a slow-frame modal field: the sum of
/// its declared `ζ` components,
/// `ĥ_ζ(k) = Ψ(β^{−(1−ε)}(k−ζk*))·β^{−d}Φ̂(β^{−1}(k−ζk*))·e^{−ik·r*}·Π_{n,ζ}(k)g_ζ`.
pub fn build_wavepacket(
    spec: &WavepacketSpec,
    model: &DispersionModel,
    grid: &Grid,
) -> Result<ModalField> {
    Ok(build_wavepacket_parts(spec, model, grid)?.into_iter().fold(
        ModalField::zeros(grid, model.ncomp(), Frame::Slow),
        |mut acc, (_, f)| {
            acc.add_assign(&f).expect("same grid");
            acc
        },
    ))
}

/// The `ζ` components of the wavepacket separately, in declared order.
pub fn build_wavepacket_parts(
    spec: &WavepacketSpec,
    model: &DispersionModel,
    grid: &Grid,
) -> Result<Vec<(Sign, ModalField)>> {
    spec.validate(model, grid)?;
    let mut parts = Vec::new();
    let plus = if spec.zeta_components.contains(&Sign::Plus) || spec.doublet_reality {
        Some(build_component(spec, model, grid, Sign::Plus)?)
    } else {
        None
    };
    for &z in &spec.zeta_components {
        let f = match z {
            Sign::Plus => plus.clone().expect("built above"),
            Sign::Minus if spec.doublet_reality => {
                conjugate_reflect(model, plus.as_ref().expect("built above"))
            }
            Sign::Minus => build_component(spec, model, grid, Sign::Minus)?,
        };
        parts.push((z, f));
    }
    Ok(parts)
}

/// Sum of several wavepackets (a multi-wavepacket).
pub fn build_multi_wavepacket(
    specs: &[WavepacketSpec],
    model: &DispersionModel,
    grid: &Grid,
) -> Result<ModalField> {
    let mut acc = ModalField::zeros(grid, model.ncomp(), Frame::Slow);
    for s in specs {
        acc.add_assign(&build_wavepacket(s, model, grid)?)?;
    }
    Ok(acc)
}

/// Regularity defect
/// `Σ_ζ ‖(1 − Ψ_clip(k − ζk*)) Π_{n,ζ}(k) field‖_{L¹}` over the declared
/// components. The clipping cutoff has plateau radius `β^{1−ε}` (radius
/// `2β^{1−ε}`), so packets produced by [`build_wavepacket`] have defect
/// exactly zero.
pub fn regularity_defect(
    field: &ModalField,
    spec: &WavepacketSpec,
    table: &SymbolTable,
) -> Result<f64> {
    if field.grid != table.grid || field.ncomp != table.ncomp {
        return Err(WavepaxError::GridMismatch(
            "field and symbol table differ".into(),
        ));
    }
    let grid = &field.grid;
    let len = grid.len();
    let j = table.ncomp / 2;
    let radius = 2.0 * spec.cutoff_radius();
    let mut total = 0.0;
    let mut k = [0.0; 2];
    for &z in &spec.zeta_components {
        let c = match z {
            Sign::Plus => spec.n - 1,
            Sign::Minus => j + spec.n - 1,
        };
        let center: Vec<f64> = spec.k_star.iter().map(|x| z.f() * x).collect();
        let proj = table.project(c, &field.data);
        let mut s = 0.0;
        for idx in 0..len {
            grid.k_into(idx, &mut k);
            let w = 1.0 - psi_at(&k[..grid.d], &center, radius);
            if w == 0.0 {
                continue;
            }
            let p: f64 = (0..table.ncomp)
                .map(|r| proj[r * len + idx].norm_sqr())
                .sum::<f64>()
                .sqrt();
            s += w * p;
        }
        total += s * grid.weight();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::GridTransform;

    fn nls() -> DispersionModel {
        DispersionModel::quadratic(1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn l1_norm_uniform_in_beta() {
        // the envelope must sit well inside the cutoff plateau |κ| ≤ β^{−ε}/2
        let width = 0.15;
        let grid = Grid::new(1, 16384, 8.0).unwrap();
        let model = nls();
        let norms: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&b| {
                let spec =
                    WavepacketSpec::gaussian(1, vec![1.0], b, width).components(&[Sign::Plus]);
                build_wavepacket(&spec, &model, &grid).unwrap().l1_norm()
            })
            .collect();
        let exact = Envelope::gaussian(width, 1.0).hat_l1(1).unwrap();
        for n in &norms {
            assert!((n - exact).abs() < 0.01 * exact, "{norms:?} vs {exact}");
        }
    }

    #[test]
    fn shift_and_reality() {
        let grid = Grid::new(1, 1024, 8.0).unwrap();
        let model = nls();
        let mut t = GridTransform::new(&grid);
        let r0 = 8.0 * grid.dr();
        let spec = WavepacketSpec::gaussian(1, vec![1.0], 0.2, 1.0);
        let h0 = build_wavepacket(&spec.clone(), &model, &grid)
            .unwrap()
            .to_r_space(&mut t);
        let h1 = build_wavepacket(&spec.at(vec![r0]), &model, &grid)
            .unwrap()
            .to_r_space(&mut t);
        let len = grid.len();
        let max = h0.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for c in 0..2 {
            for p in 8..len {
                assert!((h1[c * len + p] - h0[c * len + p - 8]).norm() < 1e-12 * max);
            }
        }
        // reality: U = U₊ + U₋ is real
        for p in 0..len {
            let u = h0[p] + h0[len + p];
            assert!(u.im.abs() <= 1e-10 * max);
        }
    }

    #[test]
    fn matrix_model_packet_lies_in_eigenspace() {
        let grid = Grid::new(1, 512, 6.0).unwrap();
        let cfg: crate::dispersion::ModelConfig =
            serde_json::from_str(r#"{"preset":"twoband"}"#).unwrap();
        let model = cfg.build(None).unwrap();
        let spec = WavepacketSpec::gaussian(1, vec![1.0], 0.2, 1.0);
        let h = build_wavepacket(&spec, &model, &grid).unwrap();
        let table = SymbolTable::new(&model, &grid);
        assert_eq!(regularity_defect(&h, &spec, &table).unwrap(), 0.0);
        let c = model.slot(1, Sign::Plus).unwrap();
        let cm = model.slot(1, Sign::Minus).unwrap();
        let p = table.project(c, &h.data);
        let pm = table.project(cm, &h.data);
        let sum: Vec<_> = p.iter().zip(&pm).map(|(a, b)| a + b).collect();
        let diff = crate::wavepacket::l1_distance(&sum, &h.data, 4, &grid);
        assert!(diff < 1e-12 * h.l1_norm());
    }

    #[test]
    fn raw_gaussian_defect_bound() {
        let grid = Grid::new(1, 8192, 16.0).unwrap();
        let model = nls();
        let table = SymbolTable::new(&model, &grid);
        let env = Envelope::gaussian(1.0, 1.0);
        let mut defects = vec![];
        for beta in [0.2, 0.1] {
            let spec = WavepacketSpec {
                epsilon: 0.3,
                ..WavepacketSpec::gaussian(1, vec![1.0], beta, 1.0).components(&[Sign::Plus])
            };
            let mut raw = ModalField::zeros(&grid, 2, Frame::Slow);
            for idx in 0..grid.len() {
                let k = grid.k_at(idx)[0];
                raw.data[idx] = Complex64::new(env.hat(&[(k - 1.0) / beta]) / beta, 0.0);
            }
            let defect = regularity_defect(&raw, &spec, &table).unwrap();
            assert!(defect <= beta.powf(2.0 * spec.epsilon) * env.hat_l1_weighted2(1).unwrap());
            defects.push(defect);
        }
        assert!(defects[1] / defects[0] < 0.5f64.powf(1.0));
    }

    #[test]
    fn pi0_and_resolution_checks() {
        let grid = Grid::new(1, 64, 4.0).unwrap();
        let model = nls();
        let spec = WavepacketSpec::gaussian(1, vec![1.0], 0.01, 1.0);
        assert!(matches!(
            spec.validate(&model, &grid),
            Err(WavepaxError::EnvelopeUnderresolved { .. })
        ));
        assert!(spec.check_pi0(0.05).is_err());
        assert!(spec.check_pi0(0.5).is_ok());
    }
}

//! Run configurations.

use crate::dispersion::{neighborhood_bounds, DispersionModel, ModelConfig};
use crate::error::{invalid, Result};
use crate::evolution::{EvolutionProblem, NonlinearityConfig, SolverConfig};
use crate::interaction::ArgumentClip;
use crate::resonance::{NkSpectrum, ResonanceOptions};
use crate::sign::Sign;
use crate::wavepacket::{build_multi_wavepacket, Envelope, GradientMode, Grid, WavepacketSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Wavevector grid of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "one")]
    pub d: usize,
    /// Nodes per axis (even).
    pub n: usize,
    /// Half-width of the k-box; exactly one of `k_max` and `dk` is required.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dk: Option<f64>,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        match (self.k_max, self.dk) {
            (Some(k), None) => Grid::new(self.d, self.n, k),
            (None, Some(dk)) => Grid::with_spacing(self.d, self.n, dk),
            _ => invalid("grid needs exactly one of k_max and dk"),
        }
    }
}

fn one() -> usize {
    1
}

fn default_components() -> Vec<Sign> {
    vec![Sign::Plus, Sign::Minus]
}

fn default_true() -> bool {
    true
}

/// One packet of the initial multi-wavepacket. The localization parameter
/// `β` and exponent `ε` come from the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub n: usize,
    pub k_star: Vec<f64>,
    /// Position in `r` units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_star: Option<Vec<f64>>,
    /// Position in rescaled `y = ϱr` units (converted to `r* = y*/ϱ`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_star: Option<Vec<f64>>,
    pub envelope: Envelope,
    #[serde(default = "default_components")]
    pub zeta_components: Vec<Sign>,
    #[serde(default = "default_true")]
    pub doublet_reality: bool,
}

impl PacketConfig {
    /// Real gaussian doublet at `k*` with envelope width `width`.
    pub fn gaussian(n: usize, k_star: Vec<f64>, width: f64) -> Self {
        PacketConfig {
            n,
            k_star,
            r_star: None,
            y_star: None,
            envelope: Envelope::gaussian(width, 1.0),
            zeta_components: default_components(),
            doublet_reality: true,
        }
    }

    /// Position `r*` for the given `ϱ`.
    pub fn position(&self, rho: f64) -> Result<Vec<f64>> {
        match (&self.r_star, &self.y_star) {
            (Some(_), Some(_)) => invalid("packet position given both as r_star and y_star"),
            (Some(r), None) => Ok(r.clone()),
            (None, Some(y)) => Ok(y.iter().map(|v| v / rho).collect()),
            (None, None) => Ok(vec![0.0; self.k_star.len()]),
        }
    }

    pub fn spec(&self, beta: f64, epsilon: f64, rho: f64) -> Result<WavepacketSpec> {
        Ok(WavepacketSpec {
            n: self.n,
            k_star: self.k_star.clone(),
            r_star: self.position(rho)?,
            beta,
            epsilon,
            envelope: self.envelope,
            zeta_components: self.zeta_components.clone(),
            doublet_reality: self.doublet_reality,
            polarization: None,
        })
    }
}

/// Resonance analysis settings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceConfig {
    /// Orders `m`; defaults to the orders of the nonlinearity.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub orders: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_res: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_k: Option<f64>,
}

/// Parameter grids of a sweep; missing lists default to the run values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub beta: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rho: Vec<f64>,
    /// Pair the lists elementwise instead of forming their product.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub zip: bool,
}

/// Closed-form soliton parameters `V = √2·b/cosh(b(x−x₀)/c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonConfig {
    pub b: f64,
    #[serde(default)]
    pub x0: f64,
}

/// Pass/fail thresholds; unset values use the experiment defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Largest accepted ratio of last to first outside mass (preservation).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
    /// Accepted band of fitted log-log slopes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_max: Option<f64>,
    /// Largest accepted RMS residual of the log-log fits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    /// Largest accepted ratio `‖v−w‖(ϱ/2)/‖v−w‖(ϱ)` (averaging).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halving_ratio: Option<f64>,
    /// Position deviation limit in units of `β^{1−ε}` (positions).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position_factor: Option<f64>,
    /// Sublevel-set diameter limit in units of `β^{−1−ε}` (positions).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diameter_factor: Option<f64>,
    /// Relative closed-form residual limit (soliton).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    /// Relative modulus drift limit (soliton).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
    /// Homogeneity discrepancy limit (averaging).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homogeneity: Option<f64>,
}

/// Field snapshots written by `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnapshotConfig {
    /// Write every `every`-th recorded time (the final time is always written).
    pub every: usize,
    /// Store single precision.
    pub single_precision: bool,
}

impl Default for SnapshotConfig {
    fn default() -> Self {
        SnapshotConfig {
            every: 1,
            single_precision: false,
        }
    }
}

/// Complete description of a run or experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub nonlinearity: NonlinearityConfig,
    pub packets: Vec<PacketConfig>,
    pub beta: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub rho: f64,
    #[serde(default = "default_tau")]
    pub tau_star: f64,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub resonance: ResonanceConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub argument_clip: ArgumentClip,
    #[serde(default)]
    pub gradient_mode: GradientMode,
    /// Position-tracking sample count over `[0, τ*]`.
    #[serde(default = "default_samples")]
    pub position_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soliton: Option<SolitonConfig>,
    #[serde(default)]
    pub snapshots: SnapshotConfig,
    /// The nonlinearity has a Hamiltonian symmetry: report the drift of
    /// `Σ|û|²Δk^d`.
    #[serde(default)]
    pub hamiltonian: bool,
    #[serde(default)]
    pub seed: u64,
    /// Parallel sweep runs (`0` = all cores).
    #[serde(default)]
    pub workers: usize,
    /// Directory against which relative model files resolve (not serialized).
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_tau() -> f64 {
    0.5
}

fn default_samples() -> usize {
    11
}

/// Everything a single `(β, ϱ)` run needs.
#[derive(Clone, Debug)]
pub struct PreparedRun {
    pub beta: f64,
    pub rho: f64,
    pub specs: Vec<WavepacketSpec>,
    pub spectrum: NkSpectrum,
    pub problem: EvolutionProblem,
}

impl RunConfig {
    /// Reads a JSON configuration; relative model files resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return invalid("epsilon must lie in (0, 1)");
        }
        if !(self.tau_star > 0.0) {
            return invalid("tau_star must be positive");
        }
        for &b in self.betas().iter() {
            if !(b > 0.0 && b < 1.0) {
                return invalid(format!("beta {b} outside (0, 1)"));
            }
        }
        for &r in self.rhos().iter() {
            if !(r > 0.0) {
                return invalid(format!("rho {r} must be positive"));
            }
        }
        if self.position_samples < 2 {
            return invalid("position_samples must be at least 2");
        }
        if self.sweep.zip && self.betas().len() != self.rhos().len() {
            return invalid("zipped sweeps need beta and rho lists of equal length");
        }
        if self.snapshots.every == 0 {
            return invalid("snapshots.every must be positive");
        }
        self.solver.validate()
    }

    pub fn betas(&self) -> Vec<f64> {
        if self.sweep.beta.is_empty() {
            vec![self.beta]
        } else {
            self.sweep.beta.clone()
        }
    }

    pub fn rhos(&self) -> Vec<f64> {
        if self.sweep.rho.is_empty() {
            vec![self.rho]
        } else {
            self.sweep.rho.clone()
        }
    }

    /// Cartesian product of the sweep lists (`β` outermost), or their
    /// elementwise pairs when `sweep.zip` is set.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let rhos = self.rhos();
        if self.sweep.zip {
            return self.betas().into_iter().zip(rhos).collect();
        }
        self.betas()
            .into_iter()
            .flat_map(|b| rhos.iter().map(move |&r| (b, r)))
            .collect()
    }

    pub fn build_model(&self) -> Result<DispersionModel> {
        self.model.build(self.base_dir.as_deref())
    }

    /// Resonance options with orders defaulting to those of the nonlinearity.
    pub fn resonance_options(&self) -> Result<ResonanceOptions> {
        let orders = if self.resonance.orders.is_empty() {
            self.nonlinearity.build()?.orders()
        } else {
            self.resonance.orders.clone()
        };
        if orders.is_empty() {
            return invalid("resonance analysis needs at least one order");
        }
        let mut opts = ResonanceOptions::new(&orders);
        opts.tol_res = self.resonance.tol_res;
        opts.tol_k = self.resonance.tol_k;
        Ok(opts)
    }

    /// nk-spectrum of the packets (duplicates collapsed).
    pub fn spectrum(&self) -> Result<NkSpectrum> {
        self.spectrum_of(&self.packets)
    }

    fn spectrum_of(&self, packets: &[PacketConfig]) -> Result<NkSpectrum> {
        let mut pairs: Vec<crate::resonance::NkPair> = Vec::new();
        for p in packets {
            if !pairs.iter().any(|q| q.n == p.n && q.k == p.k_star) {
                pairs.push(crate::resonance::NkPair::new(p.n, p.k_star.clone()));
            }
        }
        NkSpectrum::new(pairs)
    }

    /// Builds the problem at `(β, ϱ)` from the given packets.
    pub fn prepare_with(
        &self,
        beta: f64,
        rho: f64,
        packets: &[PacketConfig],
    ) -> Result<PreparedRun> {
        if packets.is_empty() {
            return invalid("at least one packet is required");
        }
        let model = self.build_model()?;
        let grid = self.grid.build()?;
        let specs: Vec<WavepacketSpec> = packets
            .iter()
            .map(|p| p.spec(beta, self.epsilon, rho))
            .collect::<Result<_>>()?;
        let half = 0.5 * grid.r_period();
        for s in &specs {
            if s.r_star.iter().any(|r| r.abs() >= half) {
                return invalid(format!(
                    "packet position {:?} not representable on the r-grid (period {})",
                    s.r_star,
                    2.0 * half
                ));
            }
        }
        let spectrum = self.spectrum_of(packets)?;
        let pi0 = neighborhood_bounds(&model, &spectrum, &grid)?.pi0;
        for s in &specs {
            s.check_pi0(pi0)?;
        }
        let h = build_multi_wavepacket(&specs, &model, &grid)?;
        let nl = self.nonlinearity.build()?;
        let problem = EvolutionProblem::new(model, nl, rho, self.tau_star, h)?.with_beta(beta);
        Ok(PreparedRun {
            beta,
            rho,
            specs,
            spectrum: self.spectrum()?,
            problem,
        })
    }

    pub fn prepare(&self, beta: f64, rho: f64) -> Result<PreparedRun> {
        self.prepare_with(beta, rho, &self.packets)
    }

    /// SHA-256 of the canonical JSON serialization (hex), excluding `workers`.
    pub fn hash(&self) -> Result<String> {
        // the worker count does not influence results
        let text = serde_json::to_string(&RunConfig {
            workers: 0,
            ..self.clone()
        })?;
        let digest = Sha256::digest(text.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn sample() -> RunConfig {
        serde_json::from_str(
            r#"{
                "model": {"preset": "nls1d", "a2": 1.0, "a0": 1.0},
                "nonlinearity": {"preset": "kerr", "q": 1.0},
                "packets": [
                    {"n": 1, "k_star": [1.0], "y_star": [-0.02], "envelope": {"family": "gaussian", "width": 0.3, "amplitude": 1.0}},
                    {"n": 1, "k_star": [-1.0], "r_star": [2.0], "envelope": {"family": "gaussian", "width": 0.3, "amplitude": 1.0}}
                ],
                "beta": 0.2,
                "rho": 0.01,
                "grid": {"n": 512, "dk": 0.005},
                "sweep": {"rho": [0.02, 0.01]}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_and_points() {
        let c = sample();
        c.validate().unwrap();
        assert_eq!(c.epsilon, 0.1);
        assert_eq!(c.tau_star, 0.5);
        assert_eq!(c.points(), vec![(0.2, 0.02), (0.2, 0.01)]);
        let mut z = sample();
        z.sweep.beta = vec![0.1, 0.05, 0.2];
        assert_eq!(z.points().len(), 6);
        z.sweep.zip = true;
        assert!(z.validate().is_err());
        z.sweep.beta.pop();
        assert_eq!(z.points(), vec![(0.1, 0.02), (0.05, 0.01)]);
        assert_eq!(c.resonance_options().unwrap().orders, vec![3]);
        assert_eq!(c.spectrum().unwrap().len(), 2);
        let p = c.prepare(0.2, 0.01).unwrap();
        assert!((p.specs[0].r_star[0] + 2.0).abs() < 1e-12);
        assert_eq!(p.problem.beta, Some(0.2));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = sample();
        let mut b = sample();
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
        b.workers = 4;
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        b.seed = 3;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = sample();
        c.packets[0].r_star = Some(vec![1.0]);
        assert!(c.prepare(0.2, 0.01).is_err());
        let mut c = sample();
        c.packets[0].y_star = Some(vec![1e4]);
        assert!(c.prepare(0.2, 0.01).is_err());
        let mut c = sample();
        c.sweep.beta = vec![1.5];
        assert!(c.validate().is_err());
        // β^(1/2) beyond the band-neighbourhood radius π₀ = 1/2
        let c = sample();
        assert!(matches!(
            c.prepare(0.3, 0.01),
            Err(crate::WavepaxError::HypothesisViolated(_))
        ));
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
        let g = GridConfig {
            d: 1,
            n: 64,
            k_max: Some(1.0),
            dk: Some(0.1),
        };
        assert!(g.build().is_err());
    }
}

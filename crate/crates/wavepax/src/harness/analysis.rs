//! Stand-alone resonance analysis of an nk-spectrum.

use super::config::RunConfig;
use crate::dispersion::ModelConfig;
use crate::error::{invalid, Result};
use crate::evolution::NonlinearityConfig;
use crate::resonance::{
    classify, genericity_probe, NkPair, NkSpectrum, ProbeResult, ResonanceOptions, ResonanceReport,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Input of `resonance analyze`: a model, the spectrum as `[n, k₁, …, k_d]`
/// rows and the interaction orders (taken from `nonlinearity` when empty).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub model: ModelConfig,
    pub spectrum: Vec<Vec<f64>>,
    #[serde(default)]
    pub orders: Vec<usize>,
    #[serde(default)]
    pub nonlinearity: Option<NonlinearityConfig>,
    #[serde(default)]
    pub tol_res: Option<f64>,
    #[serde(default)]
    pub tol_k: Option<f64>,
    /// Radius of the wavevector perturbations of the genericity probe.
    #[serde(default = "default_radius")]
    pub probe_radius: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_radius() -> f64 {
    0.05
}

/// Report of `resonance analyze`.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisOutput {
    pub report: ResonanceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeResult>,
}

impl AnalysisConfig {
    /// Reads either an analysis file or a run configuration (whose packets
    /// define the spectrum).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf);
        if value.get("packets").is_some() {
            let run = RunConfig::load(path)?;
            return AnalysisConfig::from_run(&run);
        }
        let mut c: AnalysisConfig = serde_json::from_value(value)?;
        c.base_dir = base;
        Ok(c)
    }

    pub fn from_run(run: &RunConfig) -> Result<Self> {
        let spectrum = run
            .spectrum()?
            .pairs
            .iter()
            .map(|p| {
                std::iter::once(p.n as f64)
                    .chain(p.k.iter().cloned())
                    .collect()
            })
            .collect();
        Ok(AnalysisConfig {
            model: run.model.clone(),
            spectrum,
            orders: run.resonance.orders.clone(),
            nonlinearity: Some(run.nonlinearity.clone()),
            tol_res: run.resonance.tol_res,
            tol_k: run.resonance.tol_k,
            probe_radius: default_radius(),
            seed: run.seed,
            base_dir: run.base_dir.clone(),
        })
    }

    pub fn nk_spectrum(&self) -> Result<NkSpectrum> {
        let mut pairs = Vec::with_capacity(self.spectrum.len());
        for row in &self.spectrum {
            let Some((&n, k)) = row.split_first() else {
                return invalid("spectrum rows must be [n, k_1, ..., k_d]");
            };
            if !(n >= 1.0 && n.fract() == 0.0) || k.is_empty() {
                return invalid(format!("invalid spectrum row {row:?}"));
            }
            pairs.push(NkPair::new(n as usize, k.to_vec()));
        }
        NkSpectrum::new(pairs)
    }

    pub fn options(&self) -> Result<ResonanceOptions> {
        let orders = if !self.orders.is_empty() {
            self.orders.clone()
        } else if let Some(nl) = &self.nonlinearity {
            nl.build()?.orders()
        } else {
            Vec::new()
        };
        if orders.is_empty() {
            return invalid("resonance analysis needs `orders` or a nonlinearity");
        }
        let mut opts = ResonanceOptions::new(&orders);
        opts.tol_res = self.tol_res;
        opts.tol_k = self.tol_k;
        Ok(opts)
    }
}

/// Classifies the spectrum; with `probe = Some(trials)` also estimates the
/// fraction of perturbed spectra that are universally invariant.
pub fn analyze(config: &AnalysisConfig, probe: Option<usize>) -> Result<AnalysisOutput> {
    let model = config.model.build(config.base_dir.as_deref())?;
    let spectrum = config.nk_spectrum()?;
    let opts = config.options()?;
    let report = classify(&spectrum, &model, &opts)?;
    let probe = match probe {
        Some(trials) => Some(genericity_probe(
            &spectrum,
            &model,
            &opts,
            trials,
            config.probe_radius,
            config.seed,
        )?),
        None => None,
    };
    Ok(AnalysisOutput { report, probe })
}

/// Classifies the nk-spectrum of the packets of a run configuration.
pub fn resonance_analyze(config: &RunConfig) -> Result<ResonanceReport> {
    Ok(analyze(&AnalysisConfig::from_run(config)?, None)?.report)
}

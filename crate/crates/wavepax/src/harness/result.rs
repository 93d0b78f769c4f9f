//! Experiment results and their machine-readable outputs.

use super::config::RunConfig;
use super::fit::Fit;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// Where a result came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the canonical configuration.
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
}

impl Provenance {
    pub fn of(config: &RunConfig) -> Result<Self> {
        Ok(Provenance {
            config_hash: config.hash()?,
            seed: config.seed,
            code_version: env!("CARGO_PKG_VERSION").into(),
        })
    }
}

/// Metrics of one `(β, ϱ)` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Position in the sweep (β outermost).
    pub index: usize,
    pub beta: f64,
    pub rho: f64,
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    /// Error of a failed run; the sweep continues without its metrics.
    pub error: Option<String>,
}

/// A named pass/fail decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Outcome of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub runs: Vec<RunMetrics>,
    pub fits: BTreeMap<String, Fit>,
    /// Run-independent values (ratios across runs, homogeneity checks, ...).
    pub summary: BTreeMap<String, f64>,
    /// Hypothesis checks performed before running.
    pub hypotheses: Vec<Check>,
    /// Threshold checks on the results.
    pub checks: Vec<Check>,
    pub passed: bool,
    pub provenance: Provenance,
}

impl ExperimentResult {
    pub fn new(experiment: &str, config: &RunConfig) -> Result<Self> {
        Ok(ExperimentResult {
            experiment: experiment.into(),
            runs: Vec::new(),
            fits: BTreeMap::new(),
            summary: BTreeMap::new(),
            hypotheses: Vec::new(),
            checks: Vec::new(),
            passed: true,
            provenance: Provenance::of(config)?,
        })
    }

    /// Sets `passed` from the checks and the run errors.
    pub fn finish(mut self) -> Self {
        self.passed =
            self.checks.iter().all(|c| c.passed) && self.runs.iter().all(|r| r.error.is_none());
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Values of `metric` over successful runs as `(β, ϱ, value)`.
    pub fn series(&self, metric: &str) -> Vec<(f64, f64, f64)> {
        self.runs
            .iter()
            .filter_map(|r| r.metrics.get(metric).map(|&v| (r.beta, r.rho, v)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per run: `run, beta, rho`, the union of metric names
    /// (sorted; empty when missing) and `error`.
    pub fn write_metrics_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut names: Vec<&String> = self.runs.iter().flat_map(|r| r.metrics.keys()).collect();
        names.sort();
        names.dedup();
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["run".to_string(), "beta".into(), "rho".into()];
        header.extend(names.iter().map(|s| s.to_string()));
        header.push("error".into());
        out.write_record(&header)?;
        for r in &self.runs {
            let mut row = vec![r.index.to_string(), r.beta.to_string(), r.rho.to_string()];
            row.extend(
                names
                    .iter()
                    .map(|n| r.metrics.get(*n).map(|v| v.to_string()).unwrap_or_default()),
            );
            row.push(r.error.clone().unwrap_or_default());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `result.json` and `metrics.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("result.json"), self.to_json()? + "\n")?;
        let f = std::fs::File::create(dir.join("metrics.csv"))?;
        self.write_metrics_csv(std::io::BufWriter::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result() -> ExperimentResult {
        let cfg = crate::harness::config::tests::sample();
        let mut r = ExperimentResult::new("demo", &cfg).unwrap();
        for (i, (b, rho)) in cfg.points().into_iter().enumerate() {
            let mut m = BTreeMap::new();
            m.insert("z".to_string(), 0.5 * rho);
            if i == 0 {
                m.insert("a".to_string(), 1.0);
            }
            r.runs.push(RunMetrics {
                index: i,
                beta: b,
                rho,
                metrics: m,
                warnings: vec![],
                error: None,
            });
        }
        r.checks.push(Check::new("ok", true, ""));
        r.finish()
    }

    #[test]
    fn csv_has_union_of_columns() {
        let r = result();
        assert!(r.passed);
        let mut buf = Vec::new();
        r.write_metrics_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "run,beta,rho,a,z,error");
        assert_eq!(lines[1], "0,0.2,0.02,1,0.01,");
        assert_eq!(lines[2], "1,0.2,0.01,,0.005,");
        assert_eq!(r.series("a"), vec![(0.2, 0.02, 1.0)]);
    }

    #[test]
    fn failures_propagate_and_json_round_trips() {
        let mut r = result();
        r.runs[1].error = Some("boom".into());
        let r = r.finish();
        assert!(!r.passed);
        let back: ExperimentResult = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        let dir = tempfile::tempdir().unwrap();
        r.write(dir.path()).unwrap();
        assert!(dir.path().join("result.json").exists());
        assert!(dir.path().join("metrics.csv").exists());
    }
}

//! Single full-field simulations with snapshots.

use super::config::RunConfig;
use super::result::Provenance;
use crate::dispersion::SymbolTable;
use crate::error::Result;
use crate::evolution::solve_integrated;
use crate::interaction::{output_position, InteractionSetup};
use crate::sign::Sign;
use crate::wavepacket::{l1_of, save_snapshot, Precision};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Contents of `summary.json` written by [`simulate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub beta: f64,
    pub rho: f64,
    pub recorded_times: usize,
    pub snapshots: Vec<String>,
    pub initial_l1: f64,
    pub final_l1: f64,
    /// `sup_τ` of the mass outside the cutoffs of the packet spectrum.
    pub max_outside_mass: f64,
    /// Maximum relative drift of `Σ|û|²Δk^d`.
    pub mass_drift: f64,
    pub picard_iterations: usize,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

/// Solves the full equation at `(config.beta, config.rho)` and writes
/// fast-frame snapshots (`snapshots/snap_NNNNN.wpx`), per-time metrics
/// (`metrics.csv`: `tau, l1_norm, linf_norm, mass, outside_mass` and the
/// L¹ mass `packet_l` of every pair's cutoff region) and `summary.json` into
/// `out`.
pub fn simulate(config: &RunConfig, out: &Path) -> Result<SimulationSummary> {
    config.validate()?;
    let run = config.prepare(config.beta, config.rho)?;
    let p = &run.problem;
    let traj = solve_integrated(p, &config.solver)?;
    let table = SymbolTable::new(&p.model, &p.grid);
    let setup = InteractionSetup::new(&run.spectrum, &p.model, &p.grid, run.beta, config.epsilon)?;
    let snap_dir = out.join("snapshots");
    std::fs::create_dir_all(&snap_dir)?;
    let precision = if config.snapshots.single_precision {
        Precision::Complex64
    } else {
        Precision::Complex128
    };
    let every = config.snapshots.every.max(1);
    let last = traj.times.len() - 1;
    let mut csv = csv::Writer::from_path(out.join("metrics.csv"))?;
    let mut header: Vec<String> = ["tau", "l1_norm", "linf_norm", "mass", "outside_mass"]
        .map(String::from)
        .to_vec();
    header.extend((1..=run.spectrum.len()).map(|l| format!("packet_{l}")));
    csv.write_record(&header)?;
    let mut snapshots = Vec::new();
    let (mut max_outside, mut drift) = (0.0f64, 0.0f64);
    let mass0 = traj.slow[0].data.iter().map(|z| z.norm_sqr()).sum::<f64>() * p.grid.weight();
    for (i, (&tau, u)) in traj.times.iter().zip(&traj.slow).enumerate() {
        let mass = u.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * p.grid.weight();
        let mut rest = u.data.clone();
        let mut packets = vec![vec![Complex64::new(0.0, 0.0); rest.len()]; run.spectrum.len()];
        for l in 1..=run.spectrum.len() {
            for theta in [Sign::Plus, Sign::Minus] {
                let part = setup.localize(output_position(l, theta), &table, &u.data);
                for ((r, acc), v) in rest.iter_mut().zip(packets[l - 1].iter_mut()).zip(part) {
                    *r -= v;
                    *acc += v;
                }
            }
        }
        let outside = l1_of(&rest, table.ncomp, &p.grid);
        max_outside = max_outside.max(outside);
        if mass0 > 0.0 {
            drift = drift.max((mass - mass0).abs() / mass0);
        }
        let mut row = vec![
            tau.to_string(),
            u.l1_norm().to_string(),
            u.max_abs().to_string(),
            mass.to_string(),
            outside.to_string(),
        ];
        row.extend(
            packets
                .iter()
                .map(|d| l1_of(d, table.ncomp, &p.grid).to_string()),
        );
        csv.write_record(&row)?;
        if i % every == 0 || i == last {
            let name = format!("snap_{i:05}.wpx");
            save_snapshot(
                &snap_dir.join(&name),
                &traj.fast(i, &table)?,
                Some(tau),
                precision,
            )?;
            snapshots.push(format!("snapshots/{name}"));
        }
    }
    csv.flush()?;
    let summary = SimulationSummary {
        beta: run.beta,
        rho: run.rho,
        recorded_times: traj.times.len(),
        snapshots,
        initial_l1: traj.slow[0].l1_norm(),
        final_l1: traj.final_slow().l1_norm(),
        max_outside_mass: max_outside,
        mass_drift: drift,
        picard_iterations: traj.iterations(),
        warnings: traj.warnings.clone(),
        provenance: Provenance::of(config)?,
    };
    std::fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(summary)
}

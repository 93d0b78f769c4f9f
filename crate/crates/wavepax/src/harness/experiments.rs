//! The experiments: wavepacket preservation, superposition, position
//! transport, the NLS soliton and averaged-system fidelity, each executed
//! over the `(β, ϱ)` points of its configuration.

use super::config::{PreparedRun, RunConfig};
use super::fit::{loglog_fit, Fit};
use super::result::{Check, ExperimentResult, RunMetrics};
use crate::dispersion::{sym_opnorm, DispersionModel, SymbolTable};
use crate::error::{invalid, Result, WavepaxError};
use crate::evolution::{
    solve_integrated, EvolutionProblem, Nonlinearity, NonlinearityConfig, Trajectory,
};
use crate::interaction::{
    averaged_with_coupling, build_index_sets, homogeneity_check, output_position,
    solve_averaged_system, solve_interaction_system, ArgumentClip, AveragedMode,
    AveragedPolynomial, InteractionConfig, InteractionIndexSets, InteractionSetup,
    InteractionState,
};
use crate::resonance::{classify, pair_velocities, Classification, NkSpectrum};
use crate::sign::Sign;
use crate::wavepacket::{
    l1_of, locate_position, particle_norm, DetectionField, Frame, GradientMode, GridTransform,
    ModalField, SearchBox,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Experiment selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Preservation,
    Superposition,
    Positions,
    Soliton,
    Averaging,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Preservation,
        ExperimentKind::Superposition,
        ExperimentKind::Positions,
        ExperimentKind::Soliton,
        ExperimentKind::Averaging,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Preservation => "preservation",
            ExperimentKind::Superposition => "superposition",
            ExperimentKind::Positions => "positions",
            ExperimentKind::Soliton => "soliton",
            ExperimentKind::Averaging => "averaging",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = WavepaxError;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| WavepaxError::InvalidInput(format!("unknown experiment '{s}'")))
    }
}

/// Runs experiment `kind` over all points of `config`. Hypothesis
/// violations abort with [`WavepaxError::HypothesisViolated`] unless
/// `force` is set, in which case they are only recorded.
pub fn sweep(kind: ExperimentKind, config: &RunConfig, force: bool) -> Result<ExperimentResult> {
    config.validate()?;
    match kind {
        ExperimentKind::Preservation => preservation_experiment(config, force),
        ExperimentKind::Superposition => superposition_experiment(config, force),
        ExperimentKind::Positions => position_tracking_experiment(config, force),
        ExperimentKind::Soliton => soliton_experiment(config),
        ExperimentKind::Averaging => averaging_experiment(config, force),
    }
}

type Metrics = BTreeMap<String, f64>;

/// Executes `f` on every `(β, ϱ)` point, in parallel up to `config.workers`,
/// keeping the configuration order. Failed runs record their error.
fn run_points<F>(config: &RunConfig, f: F) -> Result<Vec<RunMetrics>>
where
    F: Fn(f64, f64) -> Result<(Metrics, Vec<String>)> + Sync,
{
    let points = config.points();
    let body = || {
        points
            .par_iter()
            .enumerate()
            .map(|(index, &(beta, rho))| match f(beta, rho) {
                Ok((metrics, warnings)) => RunMetrics {
                    index,
                    beta,
                    rho,
                    metrics,
                    warnings,
                    error: None,
                },
                Err(e) => {
                    log::warn!("run {index} (beta = {beta}, rho = {rho}) failed: {e}");
                    RunMetrics {
                        index,
                        beta,
                        rho,
                        metrics: Metrics::new(),
                        warnings: vec![],
                        error: Some(e.to_string()),
                    }
                }
            })
            .collect::<Vec<_>>()
    };
    if config.workers == 0 {
        Ok(body())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| WavepaxError::InvalidInput(format!("thread pool: {e}")))?;
        Ok(pool.install(body))
    }
}

/// Records the hypotheses; fails on a violated required one unless forced.
fn enforce(result: &mut ExperimentResult, checks: Vec<(Check, bool)>, force: bool) -> Result<()> {
    let mut violated = Vec::new();
    for (c, required) in checks {
        if required && !c.passed {
            violated.push(format!("{}: {}", c.name, c.detail));
        }
        result.hypotheses.push(c);
    }
    if !violated.is_empty() && !force {
        return Err(WavepaxError::HypothesisViolated(violated.join("; ")));
    }
    Ok(())
}

fn classification(
    config: &RunConfig,
    model: &DispersionModel,
    spectrum: &NkSpectrum,
) -> Result<Classification> {
    Ok(classify(spectrum, model, &config.resonance_options()?)?.classification)
}

fn resonance_check(class: &Classification, universal: bool) -> Check {
    let ok = if universal {
        matches!(class, Classification::UniversallyInvariant)
    } else {
        class.is_invariant()
    };
    let want = if universal {
        "universally invariant"
    } else {
        "resonance invariant"
    };
    Check::new(
        "resonance_class",
        ok,
        format!("spectrum is {}; {want} required", class.label()),
    )
}

/// `β²/ϱ` stays below the solver's dispersion-ratio limit at every point.
fn ratio_check(config: &RunConfig) -> Check {
    let worst = config
        .points()
        .iter()
        .map(|(b, r)| b * b / r)
        .fold(0.0, f64::max);
    let limit = config.solver.dispersion_ratio_limit;
    Check::new(
        "dispersion_ratio",
        worst <= limit,
        format!("max beta^2/rho = {worst:.4e}, limit {limit}"),
    )
}

/// `sup_τ ‖û(τ) − Σ_{l,ϑ}Ψ_{l,ϑ}Π_{n_l,ϑ}û(τ)‖_{L¹}` and its value at `τ = 0`.
fn outside_mass(traj: &Trajectory, setup: &InteractionSetup, table: &SymbolTable) -> (f64, f64) {
    let grid = &table.grid;
    let series: Vec<f64> = traj
        .slow
        .iter()
        .map(|u| {
            let mut rest = u.data.clone();
            for q in 0..setup.len() {
                for (r, p) in rest.iter_mut().zip(setup.localize(q, table, &u.data)) {
                    *r -= p;
                }
            }
            l1_of(&rest, table.ncomp, grid)
        })
        .collect();
    (series.iter().cloned().fold(0.0, f64::max), series[0])
}

/// Relative drift of `Σ|û|²Δk^d` over the trajectory.
fn mass_drift(traj: &Trajectory) -> f64 {
    let mass = |u: &ModalField| u.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * u.grid.weight();
    let m0 = mass(&traj.slow[0]);
    if m0 == 0.0 {
        return 0.0;
    }
    traj.slow
        .iter()
        .map(|u| (mass(u) - m0).abs() / m0)
        .fold(0.0, f64::max)
}

fn common_metrics(config: &RunConfig, traj: &Trajectory, m: &mut Metrics) {
    m.insert("picard_iterations".into(), traj.iterations() as f64);
    m.insert("mesh_step".into(), traj.mesh_step);
    if config.hamiltonian {
        m.insert("mass_drift".into(), mass_drift(traj));
    }
}

/// Fits `metric` against `ϱ` separately for every `β` with at least
/// `min_points` distinct `ϱ`.
fn fits_over_rho(
    result: &ExperimentResult,
    metric: &str,
    min_points: usize,
) -> BTreeMap<String, Fit> {
    let mut groups: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for (b, r, v) in result.series(metric) {
        match groups.iter_mut().find(|g| g.0 == b) {
            Some(g) => g.1.push((r, v)),
            None => groups.push((b, vec![(r, v)])),
        }
    }
    let mut out = BTreeMap::new();
    for (b, pts) in groups {
        if pts.len() < min_points {
            continue;
        }
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        if let Ok(f) = loglog_fit(&x, &y) {
            out.insert(format!("{metric}_vs_rho@beta={b}"), f);
        }
    }
    out
}

fn slope_check(name: &str, fits: &BTreeMap<String, Fit>, lo: f64, hi: f64, max_res: f64) -> Check {
    if fits.is_empty() {
        return Check::new(name, false, "no fit available (too few points)");
    }
    let ok = fits.values().all(|f| f.within(lo, hi, max_res));
    let detail = fits
        .iter()
        .map(|(k, f)| format!("{k}: slope {:.4}, residual {:.3e}", f.slope, f.residual))
        .collect::<Vec<_>>()
        .join("; ");
    Check::new(
        name,
        ok,
        format!("{detail}; band [{lo}, {hi}], residual <= {max_res}"),
    )
}

// ---------------------------------------------------------------------------
// preservation

/// Solves the full equation and measures the mass outside the cutoffs of
/// the spectrum over time. With two or more points the ratio of the last to
/// the first outside mass is checked against `thresholds.max_ratio`
/// (default `0.5`).
pub fn preservation_experiment(config: &RunConfig, force: bool) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::new("preservation", config)?;
    let model = config.build_model()?;
    let spectrum = config.spectrum()?;
    let class = classification(config, &model, &spectrum)?;
    enforce(
        &mut result,
        vec![
            (resonance_check(&class, false), true),
            (ratio_check(config), false),
        ],
        force,
    )?;
    result.runs = run_points(config, |beta, rho| {
        let run = config.prepare(beta, rho)?;
        let traj = solve_integrated(&run.problem, &config.solver)?;
        let table = SymbolTable::new(&run.problem.model, &run.problem.grid);
        let setup = InteractionSetup::new(
            &run.spectrum,
            &run.problem.model,
            &run.problem.grid,
            beta,
            config.epsilon,
        )?;
        let (sup, initial) = outside_mass(&traj, &setup, &table);
        let mut m = Metrics::new();
        m.insert("outside_mass".into(), sup);
        m.insert("initial_outside_mass".into(), initial);
        m.insert("outside_growth".into(), sup - initial);
        m.insert("initial_l1".into(), run.problem.initial.l1_norm());
        common_metrics(config, &traj, &mut m);
        Ok((m, traj.warnings))
    })?;
    let series = result.series("outside_mass");
    if series.len() >= 2 {
        let ratio = series[series.len() - 1].2 / series[0].2;
        let limit = config.thresholds.max_ratio.unwrap_or(0.5);
        result.summary.insert("outside_mass_ratio".into(), ratio);
        result.checks.push(Check::new(
            "outside_mass_decrease",
            ratio <= limit,
            format!("last/first outside mass = {ratio:.4e}, limit {limit}"),
        ));
    }
    Ok(result.finish())
}

// ---------------------------------------------------------------------------
// superposition

/// Velocity hypothesis: pairwise distinct group velocities, or else pairs
/// with equal velocities start at distance `|r_{l₁} − r_{l₂}| ≥
/// 2C_{ω,2}τ*β^{1−ε}/ϱ` for every point, with `C_{ω,2}` the largest Hessian
/// norm at the principal wavevectors.
fn velocity_check(
    config: &RunConfig,
    model: &DispersionModel,
    spectrum: &NkSpectrum,
) -> Result<Check> {
    let (v, tol) = pair_velocities(spectrum, model)?;
    let n = spectrum.len();
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let mut equal = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if dist(&v[a], &v[b]) <= tol {
                equal.push((a, b));
            }
        }
    }
    if equal.is_empty() {
        return Ok(Check::new(
            "group_velocities",
            true,
            "pairwise distinct group velocities",
        ));
    }
    let c2 = spectrum
        .pairs
        .iter()
        .map(|p| {
            model
                .hessian(p.n, Sign::Plus, &p.k)
                .map(|h| sym_opnorm(&h, p.k.len()))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut worst = f64::INFINITY;
    for (beta, rho) in config.points() {
        let need = 2.0 * c2 * config.tau_star * beta.powf(1.0 - config.epsilon) / rho;
        for &(a, b) in &equal {
            for pa in config
                .packets
                .iter()
                .filter(|p| spectrum.find(p.n, &p.k_star, 0.0) == Some(a + 1))
            {
                for pb in config
                    .packets
                    .iter()
                    .filter(|p| spectrum.find(p.n, &p.k_star, 0.0) == Some(b + 1))
                {
                    worst =
                        worst.min(dist(&pa.position(rho)?, &pb.position(rho)?) / need.max(1e-300));
                }
            }
        }
    }
    Ok(Check::new(
        "group_velocities",
        worst >= 1.0,
        format!(
            "{} pair(s) with equal group velocity; separation / required = {worst:.4e}",
            equal.len()
        ),
    ))
}

/// Superposition defect `D̃ = G(Σĥ_l) − ΣG(ĥ_l)` from `N + 1` runs, fitted
/// against `ϱ` at fixed `β` (expected slope ≈ 1).
pub fn superposition_experiment(config: &RunConfig, force: bool) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::new("superposition", config)?;
    let model = config.build_model()?;
    let spectrum = config.spectrum()?;
    let class = classification(config, &model, &spectrum)?;
    enforce(
        &mut result,
        vec![
            (resonance_check(&class, true), true),
            (velocity_check(config, &model, &spectrum)?, true),
            (ratio_check(config), false),
        ],
        force,
    )?;
    result.runs = run_points(config, |beta, rho| {
        let all = config.prepare(beta, rho)?;
        let full = solve_integrated(&all.problem, &config.solver)?;
        let mut warnings = full.warnings.clone();
        let mut defect: Vec<Vec<Complex64>> = full.slow.iter().map(|u| u.data.clone()).collect();
        for p in &config.packets {
            let single = config.prepare_with(beta, rho, std::slice::from_ref(p))?;
            let t = solve_integrated(&single.problem, &config.solver)?;
            warnings.extend(t.warnings.iter().cloned());
            for (d, u) in defect.iter_mut().zip(&t.slow) {
                for (a, b) in d.iter_mut().zip(&u.data) {
                    *a -= b;
                }
            }
        }
        let grid = &all.problem.grid;
        let ncomp = all.problem.model.ncomp();
        let sup = defect
            .iter()
            .map(|d| l1_of(d, ncomp, grid))
            .fold(0.0, f64::max);
        let bound = rho * beta.powf(-1.0 - config.epsilon) * beta.ln().abs();
        let mut m = Metrics::new();
        m.insert("superposition_defect".into(), sup);
        m.insert("defect_over_bound".into(), sup / bound);
        m.insert("initial_l1".into(), all.problem.initial.l1_norm());
        common_metrics(config, &full, &mut m);
        warnings.sort();
        warnings.dedup();
        Ok((m, warnings))
    })?;
    let t = &config.thresholds;
    result.fits = fits_over_rho(&result, "superposition_defect", 3);
    let check = slope_check(
        "defect_slope",
        &result.fits,
        t.slope_min.unwrap_or(0.8),
        t.slope_max.unwrap_or(1.2),
        t.max_residual.unwrap_or(0.1),
    );
    if config.points().len() >= 3 {
        result.checks.push(check);
    }
    Ok(result.finish())
}

// ---------------------------------------------------------------------------
// positions

/// Fast-frame data of pair `l` filtered by its two cutoffs.
fn packet_component(
    setup: &InteractionSetup,
    table: &SymbolTable,
    l: usize,
    data: &[Complex64],
) -> Vec<Complex64> {
    let mut out = setup.localize(output_position(l, Sign::Plus), table, data);
    for (a, b) in out
        .iter_mut()
        .zip(setup.localize(output_position(l, Sign::Minus), table, data))
    {
        *a += b;
    }
    out
}

/// Tracks every packet through the run: positions of the filtered fast
/// field against straight lines `r_{*l} + (τ/ϱ)∇ω_{n_l}(k_{*l})`, sublevel
/// diameters, re-identification at the final time, slow-frame stationarity
/// and the particle norm of the slow components.
pub fn position_tracking_experiment(config: &RunConfig, force: bool) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::new("positions", config)?;
    let model = config.build_model()?;
    let spectrum = config.spectrum()?;
    let class = classification(config, &model, &spectrum)?;
    enforce(
        &mut result,
        vec![
            (resonance_check(&class, false), true),
            (ratio_check(config), false),
        ],
        force,
    )?;
    let t = &config.thresholds;
    let pos_factor = t.position_factor.unwrap_or(5.0);
    let diam_factor = t.diameter_factor.unwrap_or(10.0);
    result.runs = run_points(config, |beta, rho| track(config, beta, rho, diam_factor))?;
    let mut ok_dev = true;
    let mut ok_id = true;
    let mut details = Vec::new();
    for r in &result.runs {
        let Some(&dev) = r.metrics.get("max_y_deviation") else {
            continue;
        };
        let limit = pos_factor * r.beta.powf(1.0 - config.epsilon);
        ok_dev &= dev <= limit;
        ok_id &= r.metrics.get("reidentified") == Some(&1.0)
            && r.metrics.get("localization_failures") == Some(&0.0);
        details.push(format!(
            "run {}: deviation {dev:.4e} (limit {limit:.4e})",
            r.index
        ));
    }
    result.checks.push(Check::new(
        "straight_line_transport",
        ok_dev,
        details.join("; "),
    ));
    result.checks.push(Check::new(
        "reidentification",
        ok_id,
        format!("sublevel sets localized (diameter <= {diam_factor} beta^(-1-eps)) and disjoint after the run"),
    ));
    Ok(result.finish())
}

fn track(
    config: &RunConfig,
    beta: f64,
    rho: f64,
    diam_factor: f64,
) -> Result<(Metrics, Vec<String>)> {
    let run: PreparedRun = config.prepare(beta, rho)?;
    let p = &run.problem;
    let traj = solve_integrated(p, &config.solver)?;
    let table = SymbolTable::new(&p.model, &p.grid);
    let setup = InteractionSetup::new(&run.spectrum, &p.model, &p.grid, beta, config.epsilon)?;
    let (vel, _) = pair_velocities(&run.spectrum, &p.model)?;
    let eps = config.epsilon;
    let mode = config.gradient_mode;
    let n_pairs = run.spectrum.len();
    // initial position of each pair (first packet on it)
    let r0: Vec<Vec<f64>> = (1..=n_pairs)
        .map(|l| {
            let pair = run.spectrum.pair(l);
            run.specs
                .iter()
                .find(|s| s.n == pair.n && s.k_star == pair.k)
                .map(|s| s.r_star.clone())
                .unwrap_or_default()
        })
        .collect();
    let last = traj.times.len() - 1;
    let samples: Vec<usize> = {
        let s = config.position_samples;
        let mut v: Vec<usize> = (0..s).map(|i| (i * last + (s - 1) / 2) / (s - 1)).collect();
        v.dedup();
        v
    };
    let inv = beta.powf(-1.0 - eps);
    let diam_limit = diam_factor * inv;
    let mut max_dev: f64 = 0.0;
    let mut max_diam: f64 = 0.0;
    let mut failures = 0usize;
    let mut slow_drift: f64 = 0.0;
    let mut final_sets: Vec<Option<(f64, f64)>> = vec![None; n_pairs];
    let mut pnorms = Vec::new();
    let mut slow_r0: Vec<Option<Vec<f64>>> = vec![None; n_pairs];
    for &i in &samples {
        let tau = traj.times[i];
        let fast = traj.fast(i, &table)?;
        let slow = &traj.slow[i];
        let mut parts = Vec::new();
        for l in 1..=n_pairs {
            let pred: Vec<f64> = r0[l - 1]
                .iter()
                .zip(&vel[l - 1])
                .map(|(r, v)| r + tau / rho * v)
                .collect();
            let comp = packet_component(&setup, &table, l, &fast.data);
            let det = DetectionField::from_data(&p.grid, table.ncomp, &comp, mode);
            let thr = 3.0 * inv * det.mass();
            let half = (2.0 * diam_limit).max(pos_factor_window(beta, eps, rho));
            let search = SearchBox::around(&pred, half, 0.25 / beta);
            match locate_position(&det, thr, &search)
                .and_then(|e| e.require_localized(diam_limit).cloned())
            {
                Ok(est) => {
                    let dev = rho
                        * est
                            .r_hat
                            .iter()
                            .zip(&pred)
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>()
                            .sqrt();
                    max_dev = max_dev.max(dev);
                    max_diam = max_diam.max(est.diameter);
                    if i == last && p.grid.d == 1 {
                        final_sets[l - 1] = Some((
                            est.r_hat[0] - 0.5 * est.diameter,
                            est.r_hat[0] + 0.5 * est.diameter,
                        ));
                    }
                }
                Err(e) => {
                    log::info!("packet {l} at tau = {tau}: {e}");
                    failures += 1;
                }
            }
            // slow frame: position of the filtered slow field
            let scomp = packet_component(&setup, &table, l, &slow.data);
            let sdet = DetectionField::from_data(&p.grid, table.ncomp, &scomp, mode);
            let search = SearchBox::around(&r0[l - 1], 2.0 * diam_limit, 0.25 / beta);
            if let Ok(est) = locate_position(&sdet, 3.0 * inv * sdet.mass(), &search) {
                match &slow_r0[l - 1] {
                    None => slow_r0[l - 1] = Some(est.r_hat.clone()),
                    Some(a) => {
                        let d = est
                            .r_hat
                            .iter()
                            .zip(a)
                            .map(|(x, y)| (x - y).powi(2))
                            .sum::<f64>()
                            .sqrt();
                        slow_drift = slow_drift.max(d);
                    }
                }
            }
            parts.push((
                ModalField::from_data(&p.grid, table.ncomp, Frame::Slow, scomp)?,
                r0[l - 1].clone(),
            ));
        }
        let refs: Vec<(&ModalField, &[f64])> =
            parts.iter().map(|(f, r)| (f, r.as_slice())).collect();
        pnorms.push(particle_norm(&refs, beta, eps, mode));
    }
    // re-identification: localized and pairwise disjoint at the final time
    let mut reidentified = p.grid.d == 1 && final_sets.iter().all(Option::is_some);
    let mut gap = f64::INFINITY;
    if reidentified {
        let sets: Vec<(f64, f64)> = final_sets.iter().flatten().cloned().collect();
        for a in 0..sets.len() {
            for b in a + 1..sets.len() {
                let g = sets[a].0.max(sets[b].0) - sets[a].1.min(sets[b].1);
                gap = gap.min(g);
            }
        }
        reidentified = gap > 0.0;
    }
    let pmin = pnorms.iter().cloned().fold(f64::INFINITY, f64::min);
    let pmax = pnorms.iter().cloned().fold(0.0, f64::max);
    let mut m = Metrics::new();
    m.insert("max_y_deviation".into(), max_dev);
    m.insert("max_diameter".into(), max_diam);
    m.insert("localization_failures".into(), failures as f64);
    m.insert("reidentified".into(), if reidentified { 1.0 } else { 0.0 });
    if gap.is_finite() {
        m.insert("final_gap".into(), gap);
    }
    m.insert("slow_position_drift".into(), slow_drift);
    m.insert("slow_drift_times_beta".into(), slow_drift * beta);
    m.insert(
        "particle_norm_ratio".into(),
        if pmin > 0.0 { pmax / pmin } else { f64::NAN },
    );
    common_metrics(config, &traj, &mut m);
    Ok((m, traj.warnings))
}

/// Half-width of the search window that still contains every position
/// within the deviation allowance (in `r` units).
fn pos_factor_window(beta: f64, eps: f64, rho: f64) -> f64 {
    10.0 * beta.powf(1.0 - eps) / rho
}

// ---------------------------------------------------------------------------
// soliton

/// Closed-form NLS soliton: residual of the stationary equation on the grid
/// and evolution of the doublet `U₊ = U₋ = V` under the full equation.
///
/// With `ω = a₂k² + a₀` and `F₊ = iqU₊²U₋`, a real profile `V` gives the
/// rotating solution `U₊ = e^{−iφτ/ϱ}V`, `U₋ = e^{iφτ/ϱ}V` exactly when
/// `c²V″ + V³ − b²V = 0` with `c² = a₂/(ϱq)` and `φ = a₀ − b²ϱq`.
pub fn soliton_experiment(config: &RunConfig) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::new("soliton", config)?;
    let sol = config
        .soliton
        .clone()
        .ok_or_else(|| WavepaxError::InvalidInput("soliton parameters missing".into()))?;
    if config.model.preset != "nls1d" || config.model.d != 1 {
        return invalid("the soliton experiment needs the one-dimensional nls1d preset");
    }
    let a2 = config.model.a2.unwrap_or(1.0);
    let a0 = config.model.a0.unwrap_or(0.0);
    let NonlinearityConfig::Kerr { q } = config.nonlinearity else {
        return invalid("the soliton experiment needs a kerr nonlinearity");
    };
    for (_, rho) in config.points() {
        let c2 = a2 / (rho * q);
        if !(c2 > 0.0 && c2.is_finite()) {
            return Err(WavepaxError::ParameterSignError(format!(
                "c^2 = a2/(rho q) = {c2} must be positive"
            )));
        }
    }
    let t = &config.thresholds;
    let res_limit = t.residual.unwrap_or(1e-8);
    let drift_limit = t.drift.unwrap_or(1e-3);
    result.runs = run_points(config, |_beta, rho| {
        soliton_run(config, a2, a0, q, sol.b, sol.x0, rho)
    })?;
    let all = |name: &str, limit: f64| {
        let vals: Vec<f64> = result
            .runs
            .iter()
            .filter_map(|r| r.metrics.get(name).copied())
            .collect();
        let worst = vals.iter().cloned().fold(0.0, f64::max);
        (
            !vals.is_empty() && worst <= limit,
            format!("max {name} = {worst:.4e}, limit {limit:.1e}"),
        )
    };
    let (ok, d) = all("closed_form_residual", res_limit);
    result
        .checks
        .push(Check::new("closed_form_residual", ok, d));
    let (ok, d) = all("modulus_drift", drift_limit);
    result.checks.push(Check::new("modulus_drift", ok, d));
    let (ok, d) = all("phase_error", drift_limit);
    result.checks.push(Check::new("phase_rate", ok, d));
    Ok(result.finish())
}

fn soliton_run(
    config: &RunConfig,
    a2: f64,
    a0: f64,
    q: f64,
    b: f64,
    x0: f64,
    rho: f64,
) -> Result<(Metrics, Vec<String>)> {
    let grid = config.grid.build()?;
    let model = config.build_model()?;
    let c = (a2 / (rho * q)).sqrt();
    let n = grid.len();
    let x: Vec<f64> = (0..n).map(|p| grid.r_axis(p)).collect();
    let v: Vec<f64> = x
        .iter()
        .map(|xi| 2f64.sqrt() * b / (b * (xi - x0) / c).cosh())
        .collect();
    let mut tr = GridTransform::new(&grid);
    // spectral second derivative
    let mut vk: Vec<Complex64> = v.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    tr.to_k(&mut vk);
    for (j, z) in vk.iter_mut().enumerate() {
        let k = grid.k_axis(j);
        *z *= -k * k;
    }
    tr.to_r(&mut vk);
    let mut res: f64 = 0.0;
    let mut cube: f64 = 0.0;
    for (vi, d2) in v.iter().zip(&vk) {
        res = res.max((-b * b * vi + c * c * d2.re + vi.powi(3)).abs());
        cube = cube.max(vi.powi(3).abs());
    }
    let values: Vec<Complex64> = v
        .iter()
        .chain(&v)
        .map(|&a| Complex64::new(a, 0.0))
        .collect();
    let h = ModalField::from_r_space(&grid, 2, Frame::Slow, values, &mut tr)?;
    let problem = EvolutionProblem::new(model, Nonlinearity::kerr(q), rho, config.tau_star, h)?;
    let traj = solve_integrated(&problem, &config.solver)?;
    let table = SymbolTable::new(&problem.model, &problem.grid);
    let last = traj.times.len() - 1;
    let fin = traj.fast(last, &table)?.to_r_space(&mut tr);
    let vmax = v.iter().cloned().fold(0.0, f64::max);
    let drift = v
        .iter()
        .zip(&fin[..n])
        .map(|(a, u)| (u.norm() - a).abs())
        .fold(0.0, f64::max)
        / vmax;
    let phi = a0 - b * b * rho * q;
    let tau = traj.times[last];
    let p0 = x
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x0).abs().total_cmp(&(b.1 - x0).abs()))
        .map(|a| a.0)
        .unwrap_or(0);
    let want = Complex64::from_polar(v[p0], -phi * tau / rho);
    let phase_error = (fin[p0] * want.conj()).arg().abs();
    let mut m = Metrics::new();
    m.insert("closed_form_residual".into(), res / cube);
    m.insert("modulus_drift".into(), drift);
    m.insert("phase_error".into(), phase_error);
    m.insert("phi".into(), phi);
    m.insert("c".into(), c);
    common_metrics(config, &traj, &mut m);
    Ok((m, traj.warnings))
}

// ---------------------------------------------------------------------------
// averaging

/// Basis of the phase tuples `φ` satisfying `ϑφ_l = Σ_j ζ_jφ_{l_j}` for every
/// term of the averaged polynomial (columns of the returned matrix).
fn phase_constraints(poly: &AveragedPolynomial, n: usize) -> DMatrix<f64> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (&(l, theta), terms) in poly.labels.iter().zip(&poly.terms) {
        for (lam, _) in terms {
            let mut row = vec![0.0; n];
            row[l - 1] -= theta.f();
            for &(z, lj) in &lam.entries {
                row[lj - 1] += z.f();
            }
            if row.iter().any(|&x| x != 0.0) {
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return DMatrix::identity(n, n);
    }
    let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10).count();
    let null: Vec<usize> = (0..vt.nrows()).skip(rank).collect();
    let mut basis = DMatrix::zeros(n, null.len());
    for (c, &r) in null.iter().enumerate() {
        for j in 0..n {
            basis[(j, c)] = vt[(r, j)];
        }
    }
    // rows of Vᵀ beyond min(rows, n) are missing in the thin SVD; complete them
    if vt.nrows() < n {
        let extra = n - vt.nrows();
        let mut full = DMatrix::zeros(n, basis.ncols() + extra);
        full.columns_mut(0, basis.ncols()).copy_from(&basis);
        // Gram–Schmidt completion against the row space
        let mut col = basis.ncols();
        for e in 0..n {
            if col == full.ncols() {
                break;
            }
            let mut x = nalgebra::DVector::from_fn(n, |i, _| if i == e { 1.0 } else { 0.0 });
            for r in 0..vt.nrows() {
                let v = vt.row(r).transpose();
                x -= &v * v.dot(&x);
            }
            for c2 in 0..col {
                let v = full.column(c2).into_owned();
                x -= &v * v.dot(&x);
            }
            let norm = x.norm();
            if norm > 1e-8 {
                full.set_column(col, &(x / norm));
                col += 1;
            }
        }
        return full;
    }
    basis
}

/// Homogeneity discrepancies over 20 random tuples: unconstrained phases and
/// phases on the constraint surface (equal for universal spectra).
fn homogeneity_summary(poly: &AveragedPolynomial, n: usize, seed: u64) -> Result<(f64, f64)> {
    let basis = phase_constraints(poly, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut free, mut constrained): (f64, f64) = (0.0, f64::NEG_INFINITY);
    let mut free_min = f64::INFINITY;
    for _ in 0..20 {
        let u: Vec<Complex64> = (0..2 * n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let phases: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let d = homogeneity_check(poly, &phases, &u)?;
        free = free.max(d);
        free_min = free_min.min(d);
        let coeffs: Vec<f64> = (0..basis.ncols())
            .map(|_| rng.gen_range(-3.0..3.0))
            .collect();
        let on: Vec<f64> = (0..n)
            .map(|j| (0..basis.ncols()).map(|c| basis[(j, c)] * coeffs[c]).sum())
            .collect();
        constrained = constrained.max(homogeneity_check(poly, &on, &u)?);
    }
    // for conditional spectra report the smallest off-surface discrepancy
    Ok((
        if basis.ncols() == n { free } else { free_min },
        constrained.max(0.0),
    ))
}

fn particle_norm_ratio(
    states: &[InteractionState],
    r0: &[Vec<f64>],
    beta: f64,
    eps: f64,
    mode: GradientMode,
) -> f64 {
    let norms: Vec<f64> = states
        .iter()
        .map(|s| {
            let parts: Vec<(&ModalField, &[f64])> = s
                .labels
                .iter()
                .zip(&s.components)
                .map(|(&(l, _), c)| (c, r0[l - 1].as_slice()))
                .collect();
            particle_norm(&parts, beta, eps, mode)
        })
        .collect();
    let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = norms.iter().cloned().fold(0.0, f64::max);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::NAN
    }
}

/// Interaction system `w` versus its time-averaged version `v` (unclipped
/// arguments): `‖v − w‖`, the coupling norm along `v`, the particle norm of
/// `v` and the homogeneity identity. With `argument_clip = half` the
/// clipped averaged system is solved too and compared with `w` and `v`.
pub fn averaging_experiment(config: &RunConfig, force: bool) -> Result<ExperimentResult> {
    let mut result = ExperimentResult::new("averaging", config)?;
    let model = config.build_model()?;
    let spectrum = config.spectrum()?;
    let class = classification(config, &model, &spectrum)?;
    enforce(
        &mut result,
        vec![
            (resonance_check(&class, false), true),
            (ratio_check(config), false),
        ],
        force,
    )?;
    let opts = config.resonance_options()?;
    let sets: InteractionIndexSets =
        build_index_sets(&spectrum, &model, &opts.orders, config.resonance.tol_res)?;
    let icfg = InteractionConfig {
        solver: config.solver.clone(),
        epsilon: config.epsilon,
        tol_res: config.resonance.tol_res,
        argument_clip: config.argument_clip,
        force_partition: false,
    };
    result.runs = run_points(config, |beta, rho| {
        let run = config.prepare(beta, rho)?;
        let p = &run.problem;
        let w = solve_interaction_system(p, &spectrum, &icfg)?;
        // the fidelity bound concerns the averaged system with unclipped
        // arguments; the configured clip is reported alongside
        let exact = InteractionConfig {
            argument_clip: ArgumentClip::None,
            ..icfg.clone()
        };
        let (v, coupling) = averaged_with_coupling(p, &spectrum, &sets, &exact)?;
        let clipped = match icfg.argument_clip {
            ArgumentClip::None => None,
            ArgumentClip::Half => Some(solve_averaged_system(
                p,
                &spectrum,
                &sets,
                &icfg,
                AveragedMode::Full,
            )?),
        };
        let r0: Vec<Vec<f64>> = (1..=spectrum.len())
            .map(|l| {
                let pair = spectrum.pair(l);
                run.specs
                    .iter()
                    .find(|s| s.n == pair.n && s.k_star == pair.k)
                    .map(|s| s.r_star.clone())
                    .unwrap_or_default()
            })
            .collect();
        let mut m = Metrics::new();
        m.insert("v_minus_w".into(), w.sup_distance(&v)?);
        m.insert("coupling_norm".into(), coupling);
        if let Some(v1) = &clipped {
            m.insert("clipped_minus_w".into(), w.sup_distance(v1)?);
            m.insert("clip_difference".into(), v.sup_distance(v1)?);
        }
        m.insert("w_change".into(), w.final_state().l1_distance(&w.states[0]));
        m.insert(
            "particle_norm_ratio".into(),
            particle_norm_ratio(&v.states, &r0, beta, config.epsilon, config.gradient_mode),
        );
        let mut warnings = w.warnings.clone();
        warnings.extend(v.warnings.iter().cloned());
        warnings.sort();
        warnings.dedup();
        Ok((m, warnings))
    })?;
    let t = &config.thresholds;
    // ‖v − w‖ must shrink like ϱ: successive ratios against the halving limit
    let halving = t.halving_ratio.unwrap_or(0.6);
    let mut ratios = Vec::new();
    let series = result.series("v_minus_w");
    for pair in series.windows(2) {
        let (b1, r1, a) = pair[0];
        let (b2, r2, b) = pair[1];
        if b1 == b2 && r2 < r1 {
            let allowed = halving.powf((r1 / r2).log2());
            ratios.push((b / a, allowed));
        }
    }
    if !ratios.is_empty() {
        let worst = ratios.iter().map(|(r, a)| r / a).fold(0.0, f64::max);
        result
            .summary
            .insert("v_minus_w_worst_ratio_over_limit".into(), worst);
        let detail = ratios
            .iter()
            .map(|(r, a)| format!("{r:.4} (limit {a:.4})"))
            .collect::<Vec<_>>()
            .join(", ");
        result
            .checks
            .push(Check::new("v_minus_w_halving", worst <= 1.0, detail));
    }
    result.fits.extend(fits_over_rho(&result, "v_minus_w", 2));
    let coupling_fits = fits_over_rho(&result, "coupling_norm", 2);
    if !coupling_fits.is_empty() {
        let lo = t.slope_min.unwrap_or(0.8);
        let hi = t.slope_max.unwrap_or(1.2);
        let res = t.max_residual.unwrap_or(0.1);
        result
            .checks
            .push(slope_check("coupling_slope", &coupling_fits, lo, hi, res));
    }
    result.fits.extend(coupling_fits);
    // homogeneity identity of the averaged nonlinearity
    let nl = config.nonlinearity.build()?;
    let poly = AveragedPolynomial::new(&spectrum, &model, &nl, &sets)?;
    let (free, on_surface) = homogeneity_summary(&poly, spectrum.len(), config.seed)?;
    let tol = t.homogeneity.unwrap_or(1e-10);
    result
        .summary
        .insert("homogeneity_free_phases".into(), free);
    result
        .summary
        .insert("homogeneity_constrained_phases".into(), on_surface);
    let universal = matches!(class, Classification::UniversallyInvariant);
    let check = if universal {
        Check::new(
            "homogeneity",
            free <= tol,
            format!("max discrepancy over free phases {free:.3e}, limit {tol:.0e}"),
        )
    } else {
        Check::new(
            "homogeneity",
            on_surface <= tol,
            format!("on the constraint surface {on_surface:.3e} (limit {tol:.0e}); off it at least {free:.3e}"),
        )
    };
    result.checks.push(check);
    Ok(result.finish())
}

//! Wavepacket interaction systems and their averaged, diagonal and reduced
//! versions.
//!
//! The unknowns are the `2N` fields `w_{l,ϑ}`, one per pair and sign, each
//! supported in the cutoff ball of radius `R = β^{1−ε}` around `ϑk_{*l}` and
//! lying in the eigenspace of slot `(n_l, ϑ)`. The systems share the form
//!
//! ```text
//! w_{l,ϑ}(τ) = Ψ_{l,ϑ}Π_{n_l,ϑ}ĥ + ∫₀^τ Ψ_{l,ϑ}Π_{n_l,ϑ} e^{iτ′L/ϱ} N_{l,ϑ}(e^{−iτ′L/ϱ}w⃗(τ′)) dτ′
//! ```
//!
//! where `N_{l,ϑ}` is `F(Σ w)` for the interaction system and a sum of
//! decorated monomials `χ(w_{λ₁},…,w_{λ_m})` over a set of decorated indices
//! for the others. Decorated monomials whose support cannot reach the cutoff
//! ball are skipped; they vanish identically after the cutoff.

use super::index_sets::{
    kdist, output_position, partition_map, IndexSelection, InteractionIndexSets,
};
use crate::dispersion::{DispersionModel, SymbolTable};
use crate::error::{invalid, Result, WavepaxError};
use crate::evolution::picard::{picard_integrate, PicardPlan};
use crate::evolution::{
    ConvolutionMode, Convolver, EvolutionProblem, IntegrandEvaluator, Nonlinearity, SolverConfig,
};
use crate::resonance::{kappa, partial_gvm_check, DecoratedIndex, NkSpectrum, ResonanceOptions};
use crate::sign::Sign;
use crate::wavepacket::{build_cutoff, l1_distance, Frame, Grid, ModalField};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Clipping of the arguments of averaged nonlinearities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgumentClip {
    /// Arguments multiplied by `Ψ(·, ζk_{*l}, R/2)`.
    #[default]
    Half,
    /// Arguments used as they are.
    None,
}

impl ArgumentClip {
    fn factor(self) -> Option<f64> {
        match self {
            ArgumentClip::Half => Some(0.5),
            ArgumentClip::None => None,
        }
    }
}

/// Which averaged system to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragedMode {
    /// All resonant terms.
    Full,
    /// Terms with every `l_j = l`; `N` independent subsystems.
    Diagonal,
    /// Resonant terms not coupling different parts of the attached partition.
    Reduced,
}

/// Which system a trajectory solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Interaction,
    Averaged,
    Diagonal,
    Reduced,
}

/// Parameters of the interaction solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteractionConfig {
    pub solver: SolverConfig,
    /// Cutoff exponent `ε` of the radius `β^{1−ε}`.
    pub epsilon: f64,
    /// Resonance tolerance (`None` = the resonance module default).
    pub tol_res: Option<f64>,
    pub argument_clip: ArgumentClip,
    /// Solve reduced systems even when the partition fails the partial GVM
    /// check.
    pub force_partition: bool,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        InteractionConfig {
            solver: SolverConfig::default(),
            epsilon: 0.1,
            tol_res: None,
            argument_clip: ArgumentClip::Half,
            force_partition: false,
        }
    }
}

/// Geometry of the `2N` components: labels, slots and cutoffs.
#[derive(Clone, Debug)]
pub struct InteractionSetup {
    pub spectrum: NkSpectrum,
    pub beta: f64,
    pub epsilon: f64,
    /// Cutoff radius `β^{1−ε}`.
    pub radius: f64,
    /// `(l, ϑ)` in output order.
    pub labels: Vec<(usize, Sign)>,
    /// Modal slot `(n_l, ϑ)` of every component.
    pub slots: Vec<usize>,
    /// Cutoff centers `ϑk_{*l}`.
    pub centers: Vec<Vec<f64>>,
    /// `Ψ(·, ϑk_{*l}, R)` on the grid.
    pub cutoffs: Vec<Vec<f64>>,
}

impl InteractionSetup {
    pub fn new(
        spectrum: &NkSpectrum,
        model: &DispersionModel,
        grid: &Grid,
        beta: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) || !(epsilon > 0.0 && epsilon < 1.0) {
            return invalid(format!("β = {beta} and ε = {epsilon} must lie in (0, 1)"));
        }
        if spectrum.is_empty() || spectrum.dim() != grid.d || model.d != grid.d {
            return invalid(
                "spectrum, model and grid dimensions must agree and the spectrum be nonempty",
            );
        }
        spectrum.check_against(model)?;
        let radius = beta.powf(1.0 - epsilon);
        let mut labels = Vec::new();
        let mut slots = Vec::new();
        let mut centers = Vec::new();
        let mut cutoffs = Vec::new();
        for l in 1..=spectrum.len() {
            let p = spectrum.pair(l);
            for theta in Sign::BOTH {
                let c: Vec<f64> = p.k.iter().map(|x| theta.f() * x).collect();
                if !grid.contains(&c) {
                    return invalid(format!("cutoff center {c:?} lies outside the grid"));
                }
                labels.push((l, theta));
                slots.push(model.slot(p.n, theta)?);
                cutoffs.push(build_cutoff(grid, &c, radius)?);
                centers.push(c);
            }
        }
        Ok(InteractionSetup {
            spectrum: spectrum.clone(),
            beta,
            epsilon,
            radius,
            labels,
            slots,
            centers,
            cutoffs,
        })
    }

    /// Number of components `2N`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `Ψ_{l,ϑ}Π_{n_l,ϑ}v` for raw data `v`.
    pub(crate) fn localize(
        &self,
        q: usize,
        table: &SymbolTable,
        data: &[Complex64],
    ) -> Vec<Complex64> {
        let mut p = table.project(self.slots[q], data);
        let len = table.grid.len();
        for (i, z) in p.iter_mut().enumerate() {
            *z *= self.cutoffs[q][i % len];
        }
        p
    }

    /// Initial components `Ψ_{l,ϑ}Π_{n_l,ϑ}ĥ`.
    pub fn decompose(&self, h: &ModalField, table: &SymbolTable) -> Result<InteractionState> {
        let components = (0..self.len())
            .map(|q| {
                ModalField::from_data(
                    &h.grid,
                    h.ncomp,
                    Frame::Slow,
                    self.localize(q, table, &h.data),
                )
            })
            .collect::<Result<_>>()?;
        Ok(InteractionState {
            labels: self.labels.clone(),
            components,
        })
    }
}

/// Values of the `2N` components at one time.
#[derive(Clone, Debug)]
pub struct InteractionState {
    pub labels: Vec<(usize, Sign)>,
    pub components: Vec<ModalField>,
}

impl InteractionState {
    pub fn component(&self, l: usize, theta: Sign) -> &ModalField {
        &self.components[output_position(l, theta)]
    }

    /// `Σ_{l,ϑ} w_{l,ϑ}`.
    pub fn sum(&self) -> ModalField {
        let mut s = ModalField::zeros(
            &self.components[0].grid,
            self.components[0].ncomp,
            Frame::Slow,
        );
        for c in &self.components {
            for (a, b) in s.data.iter_mut().zip(&c.data) {
                *a += b;
            }
        }
        s
    }

    /// `Σ_{l,ϑ} ‖w_{l,ϑ}‖_{L¹}`.
    pub fn l1_norm(&self) -> f64 {
        self.components.iter().map(|c| c.l1_norm()).sum()
    }

    /// `Σ_{l,ϑ} ‖w_{l,ϑ} − v_{l,ϑ}‖_{L¹}`.
    pub fn l1_distance(&self, other: &InteractionState) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| l1_distance(&a.data, &b.data, a.ncomp, &a.grid))
            .sum()
    }
}

/// Recorded solution of an interaction system.
#[derive(Clone, Debug)]
pub struct InteractionTrajectory {
    pub kind: SystemKind,
    pub rho: f64,
    pub times: Vec<f64>,
    pub states: Vec<InteractionState>,
    /// Picard distances per window (subsystems of diagonal runs appended in
    /// pair order).
    pub picard_history: Vec<Vec<f64>>,
    pub mesh_step: f64,
    pub mesh_points: usize,
    pub warnings: Vec<String>,
}

impl InteractionTrajectory {
    pub fn final_state(&self) -> &InteractionState {
        self.states.last().expect("trajectory is never empty")
    }

    /// `sup_i Σ_{l,ϑ}‖w_{l,ϑ}(τ_i) − v_{l,ϑ}(τ_i)‖_{L¹}` over common samples.
    pub fn sup_distance(&self, other: &InteractionTrajectory) -> Result<f64> {
        if self.times.len() != other.times.len()
            || self
                .times
                .iter()
                .zip(&other.times)
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
        {
            return invalid("trajectories are recorded at different times");
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.l1_distance(b))
            .fold(0.0, f64::max))
    }

    /// `sup_i ‖Σ w(τ_i) − û(τ_i)‖_{L¹}` against slow fields recorded at the
    /// same times.
    pub fn sup_distance_to_fields(&self, fields: &[ModalField]) -> Result<f64> {
        if fields.len() != self.states.len() {
            return invalid("field list does not match the recorded samples");
        }
        Ok(self
            .states
            .iter()
            .zip(fields)
            .map(|(s, u)| {
                let w = s.sum();
                l1_distance(&w.data, &u.data, u.ncomp, &u.grid)
            })
            .fold(0.0, f64::max))
    }
}

/// Integrand of one system on a subset of active components.
pub(crate) enum Integrand<'a> {
    /// `F(Σ_a w_a)` with the full nonlinearity.
    Full(IntegrandEvaluator<'a>),
    /// Decorated monomials; `groups[t][a]` lists the argument tuples (local
    /// component positions) of term `t` for output `a`.
    Terms {
        nl: &'a Nonlinearity,
        groups: Vec<Vec<Vec<Vec<usize>>>>,
        clips: Option<Vec<Vec<f64>>>,
    },
}

/// Evaluator of `Ψ_aΠ_a e^{iτL/ϱ}N_a(e^{−iτL/ϱ}w⃗)` for active components.
pub(crate) struct SystemEvaluator<'a> {
    pub setup: &'a InteractionSetup,
    pub table: &'a SymbolTable,
    pub rho: f64,
    /// Global component positions of the active components.
    pub active: Vec<usize>,
    pub integrand: Integrand<'a>,
    pub mode: ConvolutionMode,
    pub padding: usize,
}

impl<'a> SystemEvaluator<'a> {
    /// Builds the decorated-term integrand for `select(l, ϑ, m)`.
    #[allow(clippy::too_many_arguments)]
    pub fn terms(
        setup: &'a InteractionSetup,
        table: &'a SymbolTable,
        nl: &'a Nonlinearity,
        rho: f64,
        active: Vec<usize>,
        clip: ArgumentClip,
        mode: ConvolutionMode,
        padding: usize,
        select: &dyn Fn(usize, Sign, usize) -> Vec<DecoratedIndex>,
    ) -> Result<Self> {
        let local = |q: usize| active.iter().position(|&a| a == q);
        let arg_radius = setup.radius * clip.factor().unwrap_or(1.0);
        let mut groups = Vec::with_capacity(nl.terms.len());
        for term in &nl.terms {
            let m = term.order;
            let mut per_out = Vec::with_capacity(active.len());
            for &q in &active {
                let (l, theta) = setup.labels[q];
                let mut tuples = Vec::new();
                for lam in select(l, theta, m) {
                    if lam.m() != m {
                        return invalid(format!(
                            "decorated index {lam} has the wrong order for m = {m}"
                        ));
                    }
                    let kap = kappa(&lam, &setup.spectrum);
                    if kdist(&kap, &setup.centers[q]) >= m as f64 * arg_radius + setup.radius {
                        continue; // supports cannot meet the cutoff ball
                    }
                    let t: Option<Vec<usize>> = lam
                        .entries
                        .iter()
                        .map(|&(z, lj)| local(output_position(lj, z)))
                        .collect();
                    match t {
                        Some(t) => tuples.push(t),
                        None => {
                            return invalid(format!(
                                "decorated index {lam} refers to an inactive component"
                            ))
                        }
                    }
                }
                per_out.push(tuples);
            }
            groups.push(per_out);
        }
        let clips = match clip.factor() {
            None => None,
            Some(f) => Some(
                active
                    .iter()
                    .map(|&q| build_cutoff(&table.grid, &setup.centers[q], setup.radius * f))
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(SystemEvaluator {
            setup,
            table,
            rho,
            active,
            integrand: Integrand::Terms { nl, groups, clips },
            mode,
            padding,
        })
    }

    /// Whether the integrand vanishes identically.
    pub fn is_zero(&self) -> bool {
        match &self.integrand {
            Integrand::Full(_) => false,
            Integrand::Terms { groups, .. } => groups.iter().flatten().all(|g| g.is_empty()),
        }
    }

    pub fn convolver(&self) -> Result<Convolver> {
        Convolver::with_padding(&self.table.grid, self.mode, self.padding)
    }

    /// Integrand for the stacked active components `u`.
    pub fn eval(&self, conv: &mut Convolver, tau: f64, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let block = self.table.ncomp * self.table.grid.len();
        let len = self.table.grid.len();
        let na = self.active.len();
        let mut out = vec![Complex64::new(0.0, 0.0); na * block];
        match &self.integrand {
            Integrand::Full(ev) => {
                let mut sum = vec![Complex64::new(0.0, 0.0); block];
                for a in 0..na {
                    for (s, v) in sum.iter_mut().zip(&u[a * block..(a + 1) * block]) {
                        *s += v;
                    }
                }
                let g = ev.eval(conv, tau, &sum)?;
                for (a, &q) in self.active.iter().enumerate() {
                    out[a * block..(a + 1) * block]
                        .copy_from_slice(&self.setup.localize(q, self.table, &g));
                }
            }
            Integrand::Terms { nl, groups, clips } => {
                let args: Vec<Vec<Complex64>> = (0..na)
                    .map(|a| {
                        let mut v = u[a * block..(a + 1) * block].to_vec();
                        if let Some(c) = clips {
                            for (i, z) in v.iter_mut().enumerate() {
                                *z *= c[a][i % len];
                            }
                        }
                        self.table.apply_exp(tau / self.rho, &mut v);
                        v
                    })
                    .collect();
                let refs: Vec<&[Complex64]> = args.iter().map(|v| v.as_slice()).collect();
                let mut outs = vec![vec![Complex64::new(0.0, 0.0); block]; na];
                for (term, g) in nl.terms.iter().zip(groups) {
                    conv.accumulate_groups(term, &refs, self.table.ncomp, g, &mut outs)?;
                }
                for (a, mut o) in outs.into_iter().enumerate() {
                    self.table.apply_exp(-tau / self.rho, &mut o);
                    out[a * block..(a + 1) * block].copy_from_slice(&self.setup.localize(
                        self.active[a],
                        self.table,
                        &o,
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// Checks problem, configuration and spectrum and returns `(β, table, setup)`.
pub(crate) fn prepare(
    problem: &EvolutionProblem,
    spectrum: &NkSpectrum,
    config: &InteractionConfig,
) -> Result<(SymbolTable, InteractionSetup)> {
    problem.validate()?;
    config.solver.validate()?;
    let beta = problem.beta.ok_or_else(|| {
        WavepaxError::InvalidInput("interaction systems need the wavepacket scale β".into())
    })?;
    let setup = InteractionSetup::new(
        spectrum,
        &problem.model,
        &problem.grid,
        beta,
        config.epsilon,
    )?;
    Ok((SymbolTable::new(&problem.model, &problem.grid), setup))
}

fn warnings(problem: &EvolutionProblem, config: &InteractionConfig, h_norm: f64) -> Vec<String> {
    let mut out = Vec::new();
    let cf = problem
        .nonlinearity
        .lipschitz_constant(problem.grid.d, h_norm);
    if cf * problem.tau_star >= 1.0 {
        out.push(format!(
            "contraction heuristic violated: C_F·τ* = {:.3e} ≥ 1",
            cf * problem.tau_star
        ));
    }
    if let Some(beta) = problem.beta {
        let ratio = beta * beta / problem.rho;
        if ratio > config.solver.dispersion_ratio_limit {
            out.push(format!(
                "β²/ϱ = {ratio:.3e} exceeds {}",
                config.solver.dispersion_ratio_limit
            ));
        }
    }
    for w in &out {
        log::warn!("{w}");
    }
    out
}

/// Output of one Picard run over a set of active components.
struct Run {
    times: Vec<f64>,
    /// Recorded stacked states of the active components.
    samples: Vec<Vec<Complex64>>,
    history: Vec<Vec<f64>>,
    steps: usize,
    h: f64,
}

fn run(
    eval: &SystemEvaluator,
    initial: &[Complex64],
    problem: &EvolutionProblem,
    config: &SolverConfig,
    observer: &mut dyn FnMut(f64, &[Complex64]),
) -> Result<Run> {
    let grid = &problem.grid;
    let ncomp = problem.model.ncomp();
    let total = eval.active.len() * ncomp;
    let (steps, h) = config.mesh(problem.tau_star, problem.rho);
    let window_steps = match config.picard_window {
        None => steps,
        Some(w) => ((w / h).round() as usize).clamp(1, steps),
    };
    let h0 = crate::wavepacket::l1_of(initial, total, grid);
    let plan = PicardPlan {
        steps,
        h,
        window_steps,
        tol: config.picard_tol * h0.max(1e-300),
        max_iter: config.picard_max_iter,
    };
    eval.convolver()?;
    let mut times = vec![0.0];
    let mut samples = vec![initial.to_vec()];
    observer(0.0, initial);
    let history = picard_integrate(
        initial,
        plan,
        eval.is_zero(),
        || eval.convolver().expect("validated"),
        |conv, t, u| eval.eval(conv, t, u),
        |a, b| {
            // E^{2N}-type distance: sum of the component L¹ distances
            let block = ncomp * grid.len();
            a.chunks(block)
                .zip(b.chunks(block))
                .map(|(x, y)| l1_distance(x, y, ncomp, grid))
                .sum()
        },
        &mut |i, t, u| {
            observer(t, u);
            if i % config.record_stride == 0 || i == steps {
                times.push(t);
                samples.push(u.to_vec());
            }
        },
    )?;
    Ok(Run {
        times,
        samples,
        history,
        steps,
        h,
    })
}

fn unstack(
    sample: &[Complex64],
    active: &[usize],
    problem: &EvolutionProblem,
) -> Result<Vec<(usize, ModalField)>> {
    let block = problem.model.ncomp() * problem.grid.len();
    active
        .iter()
        .enumerate()
        .map(|(a, &q)| {
            let f = ModalField::from_data(
                &problem.grid,
                problem.model.ncomp(),
                Frame::Slow,
                sample[a * block..(a + 1) * block].to_vec(),
            )?;
            Ok((q, f))
        })
        .collect()
}

pub(crate) fn stack(state: &InteractionState, active: &[usize]) -> Vec<Complex64> {
    active
        .iter()
        .flat_map(|&q| state.components[q].data.iter().copied())
        .collect()
}

pub(crate) fn padding(config: &SolverConfig) -> usize {
    config.dealias_factor
}

/// Solves the wavepacket interaction system
/// `w_{l,ϑ} = Ψ_{l,ϑ}Π_{n_l,ϑ}F(Σ w) + Ψ_{l,ϑ}Π_{n_l,ϑ}ĥ`.
pub fn solve_interaction_system(
    problem: &EvolutionProblem,
    spectrum: &NkSpectrum,
    config: &InteractionConfig,
) -> Result<InteractionTrajectory> {
    let (table, setup) = prepare(problem, spectrum, config)?;
    let init = setup.decompose(&problem.initial, &table)?;
    let active: Vec<usize> = (0..setup.len()).collect();
    let ev = IntegrandEvaluator::new(
        &table,
        &problem.nonlinearity,
        problem.rho,
        config.solver.convolution_mode,
        padding(&config.solver),
    );
    let eval = SystemEvaluator {
        setup: &setup,
        table: &table,
        rho: problem.rho,
        active: active.clone(),
        integrand: Integrand::Full(ev),
        mode: config.solver.convolution_mode,
        padding: padding(&config.solver),
    };
    let zero = problem.nonlinearity.is_zero();
    let eval = if zero {
        // F = 0: no iteration, components stay at their initial values
        SystemEvaluator {
            integrand: Integrand::Terms {
                nl: &problem.nonlinearity,
                groups: Vec::new(),
                clips: None,
            },
            ..eval
        }
    } else {
        eval
    };
    let mut warn = warnings(problem, config, init.l1_norm());
    let r = run(
        &eval,
        &stack(&init, &active),
        problem,
        &config.solver,
        &mut |_, _| {},
    )?;
    assemble(
        SystemKind::Interaction,
        problem,
        &setup,
        vec![(active, r)],
        &mut warn,
    )
}

fn assemble(
    kind: SystemKind,
    problem: &EvolutionProblem,
    setup: &InteractionSetup,
    runs: Vec<(Vec<usize>, Run)>,
    warnings: &mut Vec<String>,
) -> Result<InteractionTrajectory> {
    let first = &runs[0].1;
    let times = first.times.clone();
    let (steps, h) = (first.steps, first.h);
    let zero = ModalField::zeros(&problem.grid, problem.model.ncomp(), Frame::Slow);
    let mut states: Vec<InteractionState> = times
        .iter()
        .map(|_| InteractionState {
            labels: setup.labels.clone(),
            components: vec![zero.clone(); setup.len()],
        })
        .collect();
    let mut history = Vec::new();
    for (active, r) in runs {
        if r.times.len() != times.len() {
            return invalid("subsystems recorded different times");
        }
        for (state, sample) in states.iter_mut().zip(&r.samples) {
            for (q, f) in unstack(sample, &active, problem)? {
                state.components[q] = f;
            }
        }
        history.extend(r.history);
    }
    Ok(InteractionTrajectory {
        kind,
        rho: problem.rho,
        times,
        states,
        picard_history: history,
        mesh_step: h,
        mesh_points: steps + 1,
        warnings: std::mem::take(warnings),
    })
}

/// Index selection of an averaged mode.
fn selection(mode: AveragedMode) -> IndexSelection {
    match mode {
        AveragedMode::Full => IndexSelection::Resonant,
        AveragedMode::Diagonal => IndexSelection::Diag,
        AveragedMode::Reduced => IndexSelection::Red,
    }
}

/// Solves the time-averaged interaction system, or its diagonal/reduced
/// version, with the nonlinearity restricted to the selected index sets.
pub fn solve_averaged_system(
    problem: &EvolutionProblem,
    spectrum: &NkSpectrum,
    index_sets: &InteractionIndexSets,
    config: &InteractionConfig,
    mode: AveragedMode,
) -> Result<InteractionTrajectory> {
    solve_averaged_inner(problem, spectrum, index_sets, config, mode, None)
}

/// [`solve_averaged_system`] for the full or reduced modes, calling
/// `observer(τ, w⃗)` with the stacked components (output order) at every
/// mesh point.
pub fn solve_averaged_system_with(
    problem: &EvolutionProblem,
    spectrum: &NkSpectrum,
    index_sets: &InteractionIndexSets,
    config: &InteractionConfig,
    mode: AveragedMode,
    observer: &mut dyn FnMut(f64, &[Complex64]),
) -> Result<InteractionTrajectory> {
    if mode == AveragedMode::Diagonal {
        return invalid(
            "observers are not supported for the diagonal mode, whose subsystems run in parallel",
        );
    }
    solve_averaged_inner(problem, spectrum, index_sets, config, mode, Some(observer))
}

/// Callback receiving every mesh time and state.
type Observer<'a> = dyn FnMut(f64, &[Complex64]) + 'a;

fn solve_averaged_inner(
    problem: &EvolutionProblem,
    spectrum: &NkSpectrum,
    index_sets: &InteractionIndexSets,
    config: &InteractionConfig,
    mode: AveragedMode,
    observer: Option<&mut Observer<'_>>,
) -> Result<InteractionTrajectory> {
    let (table, setup) = prepare(problem, spectrum, config)?;
    if index_sets.n_pairs != spectrum.len() {
        return invalid("index sets were built for a different spectrum");
    }
    if let Some(m) = problem
        .nonlinearity
        .orders()
        .into_iter()
        .find(|m| !index_sets.orders.contains(m))
    {
        return invalid(format!("index sets lack the nonlinearity order {m}"));
    }
    let mut warn = Vec::new();
    if mode == AveragedMode::Reduced {
        let parts = index_sets
            .partition
            .as_ref()
            .ok_or_else(|| WavepaxError::InvalidInput("reduced systems need a partition".into()))?;
        partition_map(parts, spectrum.len())?;
        let mut opts = ResonanceOptions::new(&index_sets.orders);
        opts.tol_res = Some(index_sets.tol_res);
        let report = partial_gvm_check(spectrum, parts, &problem.model, &opts)?;
        if !report.ok {
            let msg = format!(
                "partition {parts:?} is not partially GVM ({} violating solutions)",
                report.violations.len()
            );
            if !config.force_partition {
                return Err(WavepaxError::HypothesisViolated(msg));
            }
            log::warn!("{msg}");
            warn.push(msg);
        }
    }
    let init = setup.decompose(&problem.initial, &table)?;
    warn.extend(warnings(problem, config, init.l1_norm()));
    let which = selection(mode);
    let select = |l: usize, theta: Sign, m: usize| index_sets.select(l, theta, m, which).to_vec();
    let groups: Vec<Vec<usize>> = match mode {
        AveragedMode::Diagonal => (1..=spectrum.len())
            .map(|l| {
                vec![
                    output_position(l, Sign::Plus),
                    output_position(l, Sign::Minus),
                ]
            })
            .collect(),
        _ => vec![(0..setup.len()).collect()],
    };
    let kind = match mode {
        AveragedMode::Full => SystemKind::Averaged,
        AveragedMode::Diagonal => SystemKind::Diagonal,
        AveragedMode::Reduced => SystemKind::Reduced,
    };
    let solve_group = |active: Vec<usize>,
                       observer: &mut dyn FnMut(f64, &[Complex64])|
     -> Result<(Vec<usize>, Run)> {
        let eval = SystemEvaluator::terms(
            &setup,
            &table,
            &problem.nonlinearity,
            problem.rho,
            active.clone(),
            config.argument_clip,
            config.solver.convolution_mode,
            padding(&config.solver),
            &select,
        )?;
        let r = run(
            &eval,
            &stack(&init, &active),
            problem,
            &config.solver,
            observer,
        )?;
        Ok((active, r))
    };
    let runs: Vec<(Vec<usize>, Run)> = match observer {
        Some(obs) => groups
            .into_iter()
            .map(|a| solve_group(a, &mut *obs))
            .collect::<Result<_>>()?,
        None => groups
            .into_par_iter()
            .map(|a| solve_group(a, &mut |_, _| {}))
            .collect::<Result<_>>()?,
    };
    assemble(kind, problem, &setup, runs, &mut warn)
}

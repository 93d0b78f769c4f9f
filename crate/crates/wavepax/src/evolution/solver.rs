//! Picard solution of the integrated evolution equation
//! `û(τ) = ĥ + ∫₀^τ e^{iτ′L/ϱ} F̂(e^{−iτ′L/ϱ}û(τ′)) dτ′`.
//!
//! The integral is discretized by the composite trapezoid rule on a uniform
//! mesh with step `h = τ*/⌈τ*/min(τ*/16, ϱ/substeps_per_rho)⌉`. Picard
//! iteration runs over whole time windows (the full interval by default);
//! because the equation is causal, solving consecutive windows yields the
//! same discrete fixed point while bounding memory.

use super::convolution::{ConvolutionMode, Convolver};
use super::picard::{picard_integrate, PicardPlan};
use super::susceptibility::Nonlinearity;
use crate::dispersion::{DispersionModel, SymbolTable};
use crate::error::{invalid, Result, WavepaxError};
use crate::wavepacket::{l1_distance, Frame, Grid, ModalField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Problem data.
#[derive(Clone, Debug)]
pub struct EvolutionProblem {
    pub model: DispersionModel,
    pub nonlinearity: Nonlinearity,
    /// `0 < ϱ ≤ 1`.
    pub rho: f64,
    /// Final time `τ* > 0`.
    pub tau_star: f64,
    pub grid: Grid,
    /// Initial data `ĥ` (slow frame; at `τ = 0` both frames coincide).
    pub initial: ModalField,
    /// Wavepacket scale `β`, when known; used for the `β²/ϱ` diagnostic.
    pub beta: Option<f64>,
}

impl EvolutionProblem {
    pub fn new(
        model: DispersionModel,
        nonlinearity: Nonlinearity,
        rho: f64,
        tau_star: f64,
        initial: ModalField,
    ) -> Result<Self> {
        let p = EvolutionProblem {
            grid: initial.grid.clone(),
            model,
            nonlinearity,
            rho,
            tau_star,
            initial,
            beta: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return invalid(format!("ϱ = {} outside (0, 1]", self.rho));
        }
        if !(self.tau_star > 0.0 && self.tau_star.is_finite()) {
            return invalid(format!("τ* = {} must be positive", self.tau_star));
        }
        if self.initial.grid != self.grid
            || self.initial.ncomp != self.model.ncomp()
            || self.model.d != self.grid.d
        {
            return Err(WavepaxError::GridMismatch(
                "initial field does not match model and grid".into(),
            ));
        }
        if self
            .initial
            .data
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return invalid("initial field has non-finite values");
        }
        self.nonlinearity.validate(self.model.ncomp())
    }
}

/// Solver parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Picard stopping tolerance on the sup-time L¹ distance, relative to
    /// `max(‖ĥ‖_{L¹}, 1e-300)`.
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Mesh nodes per unit of `ϱ`.
    pub substeps_per_rho: f64,
    /// Zero-padding factor of FFT convolutions (`0` = automatic,
    /// `⌈(m_F+1)/2⌉`).
    pub dealias_factor: usize,
    pub convolution_mode: ConvolutionMode,
    /// Keep every `record_stride`-th mesh point (the final time is always kept).
    pub record_stride: usize,
    /// Length of the Picard windows (`None` = whole interval).
    pub picard_window: Option<f64>,
    /// Threshold of the `β²/ϱ` warning.
    pub dispersion_ratio_limit: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            picard_tol: 1e-10,
            picard_max_iter: 60,
            substeps_per_rho: 10.0,
            dealias_factor: 0,
            convolution_mode: ConvolutionMode::Fft,
            record_stride: 1,
            picard_window: None,
            dispersion_ratio_limit: 10.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.picard_tol > 0.0)
            || self.picard_max_iter == 0
            || !(self.substeps_per_rho > 0.0)
            || self.record_stride == 0
        {
            return invalid("solver parameters must be positive");
        }
        if let Some(w) = self.picard_window {
            if !(w > 0.0) {
                return invalid("Picard window must be positive");
            }
        }
        Ok(())
    }

    /// Mesh step for `(τ*, ϱ)`.
    pub fn mesh(&self, tau_star: f64, rho: f64) -> (usize, f64) {
        let target = (tau_star / 16.0).min(rho / self.substeps_per_rho);
        let steps = (tau_star / target).ceil().max(1.0) as usize;
        (steps, tau_star / steps as f64)
    }
}

/// Recorded solution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub rho: f64,
    /// Recorded times, starting at `0` and ending at `τ*`.
    pub times: Vec<f64>,
    /// Slow fields `û(τ_i)`.
    pub slow: Vec<ModalField>,
    /// Picard distances per window.
    pub picard_history: Vec<Vec<f64>>,
    pub mesh_step: f64,
    pub mesh_points: usize,
    /// Diagnostics raised while solving (contraction heuristic, `β²/ϱ`).
    pub warnings: Vec<String>,
}

impl Trajectory {
    /// Fast field `Û(τ_i) = e^{−iτ_iL/ϱ}û(τ_i)`.
    pub fn fast(&self, i: usize, table: &SymbolTable) -> Result<ModalField> {
        super::frames::fast_slow_transform(&self.slow[i], table, self.rho, self.times[i])
    }

    pub fn final_slow(&self) -> &ModalField {
        self.slow.last().expect("trajectory is never empty")
    }

    /// `sup_i ‖û(τ_i)‖_{L¹}`.
    pub fn sup_l1(&self) -> f64 {
        crate::wavepacket::sup_time_norm(&self.slow)
    }

    /// Total number of Picard iterations over all windows.
    pub fn iterations(&self) -> usize {
        self.picard_history.iter().map(|h| h.len()).sum()
    }
}

/// Evaluates `G(τ, û) = e^{iτL/ϱ}F̂(e^{−iτL/ϱ}û)`.
pub struct IntegrandEvaluator<'a> {
    table: &'a SymbolTable,
    nl: &'a Nonlinearity,
    rho: f64,
    ncomp: usize,
    mode: ConvolutionMode,
    padding: usize,
}

impl<'a> IntegrandEvaluator<'a> {
    pub fn new(
        table: &'a SymbolTable,
        nl: &'a Nonlinearity,
        rho: f64,
        mode: ConvolutionMode,
        padding: usize,
    ) -> Self {
        IntegrandEvaluator {
            table,
            nl,
            rho,
            ncomp: table.ncomp,
            mode,
            padding,
        }
    }

    pub fn convolver(&self) -> Result<Convolver> {
        Convolver::with_padding(&self.table.grid, self.mode, self.padding)
    }

    /// `G(τ, u)` written to a new array.
    pub fn eval(&self, conv: &mut Convolver, tau: f64, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut fast = u.to_vec();
        self.table.apply_exp(tau / self.rho, &mut fast);
        let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
        conv.apply_into(self.nl, &fast, self.ncomp, &mut out)?;
        self.table.apply_exp(-tau / self.rho, &mut out);
        Ok(out)
    }
}

/// Solves the integrated equation, recording samples.
pub fn solve_integrated(problem: &EvolutionProblem, config: &SolverConfig) -> Result<Trajectory> {
    let table = SymbolTable::new(&problem.model, &problem.grid);
    solve_integrated_with(problem, config, &table, &mut |_, _| {})
}

/// Solves the integrated equation with a precomputed symbol table, calling
/// `observer(τ, û(τ))` at every mesh point in increasing time order.
pub fn solve_integrated_with(
    problem: &EvolutionProblem,
    config: &SolverConfig,
    table: &SymbolTable,
    observer: &mut dyn FnMut(f64, &[Complex64]),
) -> Result<Trajectory> {
    problem.validate()?;
    config.validate()?;
    if table.grid != problem.grid || table.ncomp != problem.model.ncomp() {
        return Err(WavepaxError::GridMismatch(
            "symbol table does not match the problem".into(),
        ));
    }
    let grid = &problem.grid;
    let ncomp = problem.model.ncomp();
    let (steps, h) = config.mesh(problem.tau_star, problem.rho);
    let h0 = problem.initial.l1_norm();
    let d = grid.d;
    let mut warnings = Vec::new();
    let cf = problem.nonlinearity.lipschitz_constant(d, h0);
    if cf * problem.tau_star >= 1.0 {
        let w = format!(
            "contraction heuristic violated: C_F·τ* = {:.3e} ≥ 1",
            cf * problem.tau_star
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    if let Some(beta) = problem.beta {
        let ratio = beta * beta / problem.rho;
        if ratio > config.dispersion_ratio_limit {
            let w = format!(
                "β²/ϱ = {ratio:.3e} exceeds {}",
                config.dispersion_ratio_limit
            );
            log::warn!("{w}");
            warnings.push(w);
        }
    }
    let padding = if config.dealias_factor == 0 {
        0
    } else {
        config.dealias_factor
    };
    let eval = IntegrandEvaluator::new(
        table,
        &problem.nonlinearity,
        problem.rho,
        config.convolution_mode,
        padding,
    );
    eval.convolver()?; // validates the mode/padding against the grid
    let tol = config.picard_tol * h0.max(1e-300);
    let window_steps = match config.picard_window {
        None => steps,
        Some(w) => ((w / h).round() as usize).clamp(1, steps),
    };

    let mut times = vec![0.0];
    let mut slow = vec![problem.initial.clone()];
    observer(0.0, &problem.initial.data);
    let plan = PicardPlan {
        steps,
        h,
        window_steps,
        tol,
        max_iter: config.picard_max_iter,
    };
    let mut record_err = None;
    let history = picard_integrate(
        &problem.initial.data,
        plan,
        problem.nonlinearity.is_zero(),
        || eval.convolver().expect("validated"),
        |conv, t, u| eval.eval(conv, t, u),
        |a, b| l1_distance(a, b, ncomp, grid),
        &mut |i, t, u| {
            observer(t, u);
            if i % config.record_stride == 0 || i == steps {
                times.push(t);
                match ModalField::from_data(grid, ncomp, Frame::Slow, u.to_vec()) {
                    Ok(f) => slow.push(f),
                    Err(e) => record_err = Some(e),
                }
            }
        },
    )?;
    if let Some(e) = record_err {
        return Err(e);
    }
    Ok(Trajectory {
        rho: problem.rho,
        times,
        slow,
        picard_history: history,
        mesh_step: h,
        mesh_points: steps + 1,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sign::Sign;
    use crate::wavepacket::{build_wavepacket, WavepacketSpec};

    fn nls_problem(n: usize, rho: f64, tau: f64, q: f64) -> EvolutionProblem {
        let grid = Grid::with_spacing(1, n, 0.125).unwrap();
        let model = DispersionModel::quadratic(1, 1.0, 1.0).unwrap();
        let spec = WavepacketSpec::gaussian(1, vec![1.0], 0.5, 1.0);
        let h = build_wavepacket(&spec, &model, &grid).unwrap();
        EvolutionProblem::new(model, Nonlinearity::kerr(q), rho, tau, h).unwrap()
    }

    #[test]
    fn zero_nonlinearity_keeps_initial_data() {
        let mut p = nls_problem(64, 0.1, 0.5, 1.0);
        p.nonlinearity = Nonlinearity::zero();
        let t = solve_integrated(&p, &SolverConfig::default()).unwrap();
        assert_eq!(*t.times.last().unwrap(), 0.5);
        for s in &t.slow {
            assert_eq!(s.data, p.initial.data);
        }
        // and the fast field is the linear propagator
        let table = SymbolTable::new(&p.model, &p.grid);
        let last = t.slow.len() - 1;
        let fast = t.fast(last, &table).unwrap();
        for idx in 0..p.grid.len() {
            let k = p.grid.k_at(idx)[0];
            let want = p.initial.data[idx] * Complex64::from_polar(1.0, -0.5 * (k * k + 1.0) / 0.1);
            assert!((fast.data[idx] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode_phase_rotation() {
        // One node at k = 0 with ω constant: u₊' = iq c |u₊|² u₊ with
        // c = (Δk/2π)², u₋ = conj(u₊).
        let grid = Grid::new(1, 16, 1.0).unwrap();
        let model = DispersionModel::quadratic(1, 0.0, 2.0).unwrap();
        let mut h = ModalField::zeros(&grid, 2, Frame::Slow);
        let j0 = grid.nearest_index(&[0.0]).unwrap();
        let a = Complex64::new(30.0, 10.0);
        h.data[j0] = a;
        h.data[16 + j0] = a.conj();
        let q = 2.0;
        let p = EvolutionProblem::new(model, Nonlinearity::kerr(q), 0.5, 1.0, h).unwrap();
        let cfg = SolverConfig {
            substeps_per_rho: 400.0,
            ..Default::default()
        };
        let t = solve_integrated(&p, &cfg).unwrap();
        let c = (grid.dk() / (2.0 * std::f64::consts::PI)).powi(2);
        let rate = q * c * a.norm_sqr();
        for (tau, s) in t.times.iter().zip(&t.slow) {
            let want = a * Complex64::from_polar(1.0, rate * tau);
            assert!((s.data[j0] - want).norm() < 1e-5 * a.norm(), "τ={tau}");
        }
    }

    /// Lawson RK4 in the slow variable with a fine step.
    fn lawson_rk4(p: &EvolutionProblem, steps: usize) -> Vec<Complex64> {
        let table = SymbolTable::new(&p.model, &p.grid);
        let ev = IntegrandEvaluator::new(&table, &p.nonlinearity, p.rho, ConvolutionMode::Fft, 0);
        let mut conv = ev.convolver().unwrap();
        let h = p.tau_star / steps as f64;
        let mut u = p.initial.data.clone();
        let axpy = |u: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> {
            u.iter().zip(k).map(|(a, b)| a + b * s).collect()
        };
        for i in 0..steps {
            let t = i as f64 * h;
            let k1 = ev.eval(&mut conv, t, &u).unwrap();
            let k2 = ev
                .eval(&mut conv, t + h / 2.0, &axpy(&u, &k1, h / 2.0))
                .unwrap();
            let k3 = ev
                .eval(&mut conv, t + h / 2.0, &axpy(&u, &k2, h / 2.0))
                .unwrap();
            let k4 = ev.eval(&mut conv, t + h, &axpy(&u, &k3, h)).unwrap();
            for j in 0..u.len() {
                u[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
            }
        }
        u
    }

    #[test]
    fn matches_independent_integrator() {
        let p = nls_problem(32, 0.5, 0.5, 0.3);
        let oracle = lawson_rk4(&p, 4000);
        let cfg = SolverConfig {
            substeps_per_rho: 4000.0,
            ..Default::default()
        };
        let t = solve_integrated(&p, &cfg).unwrap();
        let err = l1_distance(&t.final_slow().data, &oracle, 2, &p.grid);
        let change = l1_distance(&p.initial.data, &oracle, 2, &p.grid);
        assert!(
            change > 1e-2 * p.initial.l1_norm(),
            "nonlinearity too weak to test: {change}"
        );
        assert!(err <= 1e-6, "{err}");
        // windows give the same discrete solution
        let tw = solve_integrated(
            &p,
            &SolverConfig {
                picard_window: Some(0.1),
                ..cfg
            },
        )
        .unwrap();
        assert!(l1_distance(&tw.final_slow().data, &t.final_slow().data, 2, &p.grid) < 1e-9);
    }

    #[test]
    fn contraction_bound_and_quadrature_order() {
        let weak = nls_problem(64, 0.2, 0.5, 1e-3);
        let r = weak.initial.l1_norm();
        let cf = weak.nonlinearity.lipschitz_constant(1, r);
        assert!(cf * weak.tau_star <= 0.5, "{cf}");
        let t = solve_integrated(&weak, &SolverConfig::default()).unwrap();
        for h in &t.picard_history {
            for w in h.windows(2).skip(1) {
                if w[0] > 1e-13 {
                    assert!(w[1] <= 0.6 * w[0], "{h:?}");
                }
            }
        }
        assert!(t.sup_l1() <= 2.0 * r);
        assert!(t.warnings.is_empty());
        let p = nls_problem(64, 0.2, 0.5, 0.3);
        let run = |s: f64| {
            solve_integrated(
                &p,
                &SolverConfig {
                    substeps_per_rho: s,
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let (a, b, c) = (run(20.0), run(40.0), run(80.0));
        let e1 = l1_distance(&a.final_slow().data, &c.final_slow().data, 2, &p.grid);
        let e2 = l1_distance(&b.final_slow().data, &c.final_slow().data, 2, &p.grid);
        assert!(e1 / e2 >= 3.0, "{e1} {e2}");
    }

    #[test]
    fn divergence_and_warnings() {
        let mut p = nls_problem(32, 0.5, 2.0, 1e5);
        p.beta = Some(0.9);
        let e = solve_integrated(
            &p,
            &SolverConfig {
                picard_max_iter: 200,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(
            matches!(
                e,
                WavepaxError::PicardDiverged { .. } | WavepaxError::PicardMaxIter { .. }
            ),
            "{e}"
        );
        let p2 = nls_problem(32, 0.5, 0.5, 0.3);
        let e = solve_integrated(
            &p2,
            &SolverConfig {
                picard_max_iter: 2,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(e, WavepaxError::PicardMaxIter { .. }));
        let mut p3 = nls_problem(32, 0.01, 0.02, 0.0);
        p3.beta = Some(0.5);
        let t = solve_integrated(&p3, &SolverConfig::default()).unwrap();
        assert_eq!(t.warnings.len(), 1);
        let _ = Sign::Plus;
    }

    #[test]
    fn real_doublet_stays_real() {
        let p = nls_problem(64, 0.2, 0.5, 0.3);
        let table = SymbolTable::new(&p.model, &p.grid);
        let t = solve_integrated(&p, &SolverConfig::default()).unwrap();
        let mut tr = crate::wavepacket::GridTransform::new(&p.grid);
        let last = t.slow.len() - 1;
        let r = t.fast(last, &table).unwrap().to_r_space(&mut tr);
        let len = p.grid.len();
        let max = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..len {
            assert!((r[i] + r[len + i]).im.abs() < 1e-10 * max);
        }
    }
}

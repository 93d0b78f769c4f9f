//! Diagnostics of averaged interaction systems: the magnitude of the
//! coupling terms and the homogeneity identity of averaged nonlinearities.

use super::index_sets::{IndexSelection, InteractionIndexSets};
use super::system::{
    padding, prepare, solve_averaged_system_with, stack, AveragedMode, InteractionConfig,
    InteractionSetup, InteractionTrajectory, SystemEvaluator,
};
use crate::dispersion::{DispersionModel, SymbolTable};
use crate::error::{invalid, Result};
use crate::evolution::{Convolver, EvolutionProblem, Nonlinearity};
use crate::resonance::{DecoratedIndex, NkSpectrum};
use crate::sign::Sign;
use crate::wavepacket::l1_distance;
use nalgebra::DVector;
use num_complex::Complex64;

/// Resonant indices that are not diagonal: the coupling terms `F_{av} − F_{av,diag}`.
fn coupling_terms(
    sets: &InteractionIndexSets,
    l: usize,
    theta: Sign,
    m: usize,
) -> Vec<DecoratedIndex> {
    let diag = sets.select(l, theta, m, IndexSelection::Diag);
    sets.select(l, theta, m, IndexSelection::Resonant)
        .iter()
        .filter(|x| !diag.contains(x))
        .cloned()
        .collect()
}

/// Running trapezoid integral `I_{l,ϑ}(τ) = ∫₀^τ Ψ_{l,ϑ}Π_{n_l,ϑ}e^{iτ′L/ϱ}F_{coup}(…) dτ′`
/// tracking `sup_τ Σ_{l,ϑ}‖I_{l,ϑ}(τ)‖_{L¹}`.
pub struct CouplingIntegral<'a> {
    eval: SystemEvaluator<'a>,
    conv: Convolver,
    integral: Vec<Complex64>,
    prev: Option<(f64, Vec<Complex64>)>,
    sup: f64,
}

impl<'a> CouplingIntegral<'a> {
    pub fn new(
        setup: &'a InteractionSetup,
        table: &'a SymbolTable,
        nl: &'a Nonlinearity,
        rho: f64,
        sets: &InteractionIndexSets,
        config: &InteractionConfig,
    ) -> Result<Self> {
        let select = |l: usize, theta: Sign, m: usize| coupling_terms(sets, l, theta, m);
        let eval = SystemEvaluator::terms(
            setup,
            table,
            nl,
            rho,
            (0..setup.len()).collect(),
            config.argument_clip,
            config.solver.convolution_mode,
            padding(&config.solver),
            &select,
        )?;
        let conv = eval.convolver()?;
        let size = setup.len() * table.ncomp * table.grid.len();
        Ok(CouplingIntegral {
            eval,
            conv,
            integral: vec![Complex64::new(0.0, 0.0); size],
            prev: None,
            sup: 0.0,
        })
    }

    /// Adds the sample `(τ, w⃗)`; samples must arrive in increasing time.
    pub fn push(&mut self, tau: f64, u: &[Complex64]) -> Result<()> {
        if u.len() != self.integral.len() {
            return invalid("coupling sample has the wrong size");
        }
        let g = if self.eval.is_zero() {
            vec![Complex64::new(0.0, 0.0); u.len()]
        } else {
            self.eval.eval(&mut self.conv, tau, u)?
        };
        if let Some((t0, g0)) = &self.prev {
            if tau <= *t0 {
                return invalid("coupling samples must increase in time");
            }
            let h = tau - t0;
            for ((a, p), q) in self.integral.iter_mut().zip(g0).zip(&g) {
                *a += (p + q) * (0.5 * h);
            }
            let table = self.eval.table;
            let block = table.ncomp * table.grid.len();
            let zero = vec![Complex64::new(0.0, 0.0); block];
            let norm: f64 = self
                .integral
                .chunks(block)
                .map(|c| l1_distance(c, &zero, table.ncomp, &table.grid))
                .sum();
            self.sup = self.sup.max(norm);
        }
        self.prev = Some((tau, g));
        Ok(())
    }

    /// `sup_τ Σ‖I_{l,ϑ}(τ)‖_{L¹}` over the samples seen so far.
    pub fn value(&self) -> f64 {
        self.sup
    }
}

/// Coupling norm of a recorded averaged trajectory: the sup-time L¹ norm of
/// the coupling terms integrated by the trapezoid rule over the recorded
/// samples (the solver mesh when `record_stride = 1`).
pub fn coupling_norm(
    trajectory: &InteractionTrajectory,
    problem: &EvolutionProblem,
    spectrum: &NkSpectrum,
    sets: &InteractionIndexSets,
    config: &InteractionConfig,
) -> Result<f64> {
    let (table, setup) = prepare(problem, spectrum, config)?;
    let mut acc = CouplingIntegral::new(
        &setup,
        &table,
        &problem.nonlinearity,
        problem.rho,
        sets,
        config,
    )?;
    let all: Vec<usize> = (0..setup.len()).collect();
    for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
        acc.push(*t, &stack(s, &all))?;
    }
    Ok(acc.value())
}

/// Solves the full averaged system and accumulates the coupling norm at
/// every mesh point.
pub fn averaged_with_coupling(
    problem: &EvolutionProblem,
    spectrum: &NkSpectrum,
    sets: &InteractionIndexSets,
    config: &InteractionConfig,
) -> Result<(InteractionTrajectory, f64)> {
    let (table, setup) = prepare(problem, spectrum, config)?;
    let mut acc = CouplingIntegral::new(
        &setup,
        &table,
        &problem.nonlinearity,
        problem.rho,
        sets,
        config,
    )?;
    let mut err = None;
    let traj = solve_averaged_system_with(
        problem,
        spectrum,
        sets,
        config,
        AveragedMode::Full,
        &mut |t, u| {
            if err.is_none() {
                if let Err(e) = acc.push(t, u) {
                    err = Some(e);
                }
            }
        },
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((traj, acc.value()))
}

/// Pointwise polynomial `F_{l,ϑ}(u_{1,+}, u_{1,−}, …)` of an averaged
/// nonlinearity: the decorated monomials of the resonant indices whose output
/// wavevector is `ϑk_{*l}`, with coefficients from the susceptibilities at
/// the principal wavevectors (modal eigenvectors for matrix symbols).
#[derive(Clone, Debug)]
pub struct AveragedPolynomial {
    pub labels: Vec<(usize, Sign)>,
    /// Terms per output in output order.
    pub terms: Vec<Vec<(DecoratedIndex, Complex64)>>,
}

impl AveragedPolynomial {
    pub fn new(
        spectrum: &NkSpectrum,
        model: &DispersionModel,
        nl: &Nonlinearity,
        sets: &InteractionIndexSets,
    ) -> Result<Self> {
        let ncomp = model.ncomp();
        // modal vector of slot (n_l, ζ) at ζk_{*l}
        let vector = |l: usize, z: Sign| -> Result<(Vec<f64>, DVector<Complex64>)> {
            let p = spectrum.pair(l);
            let k: Vec<f64> = p.k.iter().map(|x| z.f() * x).collect();
            let c = model.slot(p.n, z)?;
            let v = match model.eigen(&k)?.vectors {
                None => DVector::from_fn(ncomp, |i, _| {
                    Complex64::new(if i == c { 1.0 } else { 0.0 }, 0.0)
                }),
                Some(vs) => vs.column(c).into_owned(),
            };
            Ok((k, v))
        };
        let mut labels = Vec::new();
        let mut terms = Vec::new();
        for l in 1..=spectrum.len() {
            for theta in Sign::BOTH {
                let (k_out, v_out) = vector(l, theta)?;
                let mut list = Vec::new();
                for chi in &nl.terms {
                    for lam in sets.matched(spectrum, l, theta, chi.order) {
                        let args: Vec<(Vec<f64>, DVector<Complex64>)> = lam
                            .entries
                            .iter()
                            .map(|&(z, lj)| vector(lj, z))
                            .collect::<Result<_>>()?;
                        // χ(v₁,…,v_m) in the physical basis, then projected on v_out
                        let mut out = DVector::from_element(ncomp, Complex64::new(0.0, 0.0));
                        for mono in &chi.monomials {
                            let mut prod = mono.coefficient();
                            for ((_, v), &i) in args.iter().zip(&mono.inputs) {
                                prod *= v[i];
                            }
                            out[mono.out] += prod;
                        }
                        if let Some(kernel) = &chi.kernel {
                            let refs: Vec<&[f64]> =
                                args.iter().map(|(k, _)| k.as_slice()).collect();
                            out *= kernel(&k_out, &refs);
                        }
                        let c = v_out.dotc(&out);
                        list.push((lam, c));
                    }
                }
                labels.push((l, theta));
                terms.push(list);
            }
        }
        Ok(AveragedPolynomial { labels, terms })
    }

    /// Evaluates every output for `u` in output order `(1,+), (1,−), …`.
    pub fn eval(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.terms
            .iter()
            .map(|list| {
                list.iter()
                    .map(|(lam, c)| {
                        lam.entries.iter().fold(*c, |acc, &(z, lj)| {
                            acc * u[super::index_sets::output_position(lj, z)]
                        })
                    })
                    .sum()
            })
            .collect()
    }
}

/// Largest relative discrepancy of the identity
/// `F_{l,ϑ}(…, e^{iφ_j}u_{j,+}, e^{−iφ_j}u_{j,−}, …) = e^{iϑφ_l}F_{l,ϑ}(u)`
/// over all outputs, relative to `max|F(u)|` (`0` when `F(u) = 0` on both
/// sides).
pub fn homogeneity_check(
    poly: &AveragedPolynomial,
    phases: &[f64],
    state: &[Complex64],
) -> Result<f64> {
    let n = poly.labels.len() / 2;
    if phases.len() != n || state.len() != 2 * n {
        return invalid(format!("expected {n} phases and {} state values", 2 * n));
    }
    let rotated: Vec<Complex64> = poly
        .labels
        .iter()
        .zip(state)
        .map(|(&(l, z), u)| u * Complex64::from_polar(1.0, z.f() * phases[l - 1]))
        .collect();
    let lhs = poly.eval(&rotated);
    let base = poly.eval(state);
    let scale = base.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for ((&(l, theta), a), b) in poly.labels.iter().zip(&lhs).zip(&base) {
        let rhs = b * Complex64::from_polar(1.0, theta.f() * phases[l - 1]);
        worst = worst.max((a - rhs).norm());
    }
    if worst == 0.0 {
        return Ok(0.0);
    }
    Ok(worst / scale.max(1e-300))
}

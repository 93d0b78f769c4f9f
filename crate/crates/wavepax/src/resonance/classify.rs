//! Invariance classification of nk-spectra.

use super::enumerate::{
    closure, enumerate_solutions, output_spectrum, resonant_outputs, select_from, Enumeration,
    ResonanceOptions, ResonanceSolution, SkippedOutput,
};
use super::exact::exact_residual_is_zero;
use super::spectrum::{NkPair, NkSpectrum};
use crate::dispersion::DispersionModel;
use crate::error::Result;
use serde::{Deserialize, Serialize};

/// Equivalence class of non-universal internal solutions: the condition
/// row `b` together with the cardinality vector `c`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConditionClass {
    pub b: Vec<i64>,
    pub c: Vec<usize>,
}

/// Invariance class of an nk-spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    /// `R(S) = S` and every internal solution is universal.
    UniversallyInvariant,
    /// `R(S) = S` with non-universal internal solutions; they exist only
    /// because the integer conditions `Σ_l b_{l,i} ω_{n_l}(k_{*l}) = 0` hold.
    ConditionallyInvariant {
        conditions: Vec<Vec<i64>>,
        classes: Vec<ConditionClass>,
    },
    /// `R(S) = S` with non-universal solutions that impose no condition
    /// (all condition rows vanish).
    Invariant,
    /// `R(S) ≠ S`.
    NotInvariant,
}

impl Classification {
    /// Whether `R(S) = S`.
    pub fn is_invariant(&self) -> bool {
        !matches!(self, Classification::NotInvariant)
    }

    /// Short label.
    pub fn label(&self) -> &'static str {
        match self {
            Classification::UniversallyInvariant => "universally_invariant",
            Classification::ConditionallyInvariant { .. } => "conditionally_invariant",
            Classification::Invariant => "invariant",
            Classification::NotInvariant => "not_invariant",
        }
    }
}

/// Full resonance analysis of a spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub spectrum: NkSpectrum,
    pub orders: Vec<usize>,
    pub tol_res: f64,
    pub tol_k: f64,
    /// `P(S)`.
    pub solutions: Vec<ResonanceSolution>,
    /// Positions in `solutions` of `P_int(S)`.
    pub internal: Vec<usize>,
    /// Positions in `solutions` of `P_univ(S)`.
    pub universal: Vec<usize>,
    /// Candidates skipped because their output is band-crossing.
    pub skipped: Vec<SkippedOutput>,
    /// `[S]_out`.
    pub out_k: Vec<NkPair>,
    /// `[S]_out^res`.
    pub out_res: Vec<NkPair>,
    /// `R(S)`.
    pub selected: NkSpectrum,
    pub classification: Classification,
    /// `R^∞(S)` when the closure succeeded.
    pub closure: Option<NkSpectrum>,
    pub closure_converged: bool,
    pub closure_iterations: usize,
    /// Exact rational confirmation of every solution (closed-form rational
    /// bands only).
    pub exact_verified: Option<bool>,
}

impl ResonanceReport {
    /// Iterator over `P_int(S)`.
    pub fn internal_solutions(&self) -> impl Iterator<Item = &ResonanceSolution> {
        self.internal.iter().map(|&i| &self.solutions[i])
    }

    /// Iterator over `P_univ(S)`.
    pub fn universal_solutions(&self) -> impl Iterator<Item = &ResonanceSolution> {
        self.universal.iter().map(|&i| &self.solutions[i])
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("spectrum      {}\n", self.spectrum));
        s.push_str(&format!("orders        {:?}\n", self.orders));
        s.push_str(&format!("class         {}\n", self.classification.label()));
        s.push_str(&format!(
            "solutions     {} (internal {}, universal {}, skipped {})\n",
            self.solutions.len(),
            self.internal.len(),
            self.universal.len(),
            self.skipped.len()
        ));
        s.push_str(&format!("R(S)          {}\n", self.selected));
        if let Some(c) = &self.closure {
            s.push_str(&format!(
                "closure       {} ({} iterations)\n",
                c, self.closure_iterations
            ));
        }
        if let Classification::ConditionallyInvariant { conditions, .. } = &self.classification {
            for b in conditions {
                s.push_str(&format!("condition     {b:?}\n"));
            }
        }
        s.push_str("  m  ζ  n  λ                          δ          class\n");
        for sol in &self.solutions {
            s.push_str(&format!(
                "  {}  {}  {}  {:<26} {:<10} {:?}\n",
                sol.m,
                sol.zeta,
                sol.n,
                sol.index.to_string(),
                format!("{:?}", sol.delta),
                sol.class
            ));
        }
        s
    }
}

/// Condition row of an internal solution with `I(λ) = i0`:
/// `b_l = δ_l` for `l ≠ I₀` and `b_{I₀} = δ_{I₀} − ζ`, normalised so that its
/// first nonzero entry is positive.
pub fn condition_row(sol: &ResonanceSolution, i0: usize) -> Vec<i64> {
    let mut b = sol.delta.clone();
    b[i0 - 1] -= sol.zeta.value();
    if let Some(first) = b.iter().find(|&&v| v != 0) {
        if *first < 0 {
            b.iter_mut().for_each(|v| *v = -*v);
        }
    }
    b
}

/// Builds the report from a finished enumeration.
fn report_from(
    spectrum: &NkSpectrum,
    model: &DispersionModel,
    opts: &ResonanceOptions,
    e: Enumeration,
) -> Result<ResonanceReport> {
    let internal: Vec<usize> = e
        .solutions
        .iter()
        .enumerate()
        .filter(|(_, s)| s.class.internal_index().is_some())
        .map(|(i, _)| i)
        .collect();
    let universal: Vec<usize> = e
        .solutions
        .iter()
        .enumerate()
        .filter(|(_, s)| s.class.is_universal())
        .map(|(i, _)| i)
        .collect();
    let selected = select_from(spectrum, &e);
    let invariant = selected.set_eq(spectrum, e.tol_k);
    let classification = if !invariant {
        Classification::NotInvariant
    } else if internal.len() == universal.len() {
        Classification::UniversallyInvariant
    } else {
        let mut classes: Vec<ConditionClass> = Vec::new();
        for &i in &internal {
            let s = &e.solutions[i];
            if s.class.is_universal() {
                continue;
            }
            let i0 = s.class.internal_index().expect("internal");
            let cls = ConditionClass {
                b: condition_row(s, i0),
                c: s.index.counts(spectrum.len()),
            };
            if !classes.contains(&cls) {
                classes.push(cls);
            }
        }
        classes.sort();
        let mut conditions: Vec<Vec<i64>> = classes
            .iter()
            .map(|c| c.b.clone())
            .filter(|b| b.iter().any(|&v| v != 0))
            .collect();
        conditions.dedup();
        if conditions.is_empty() {
            Classification::Invariant
        } else {
            Classification::ConditionallyInvariant {
                conditions,
                classes,
            }
        }
    };
    let (closure_spec, conv, iters) = match closure(spectrum, model, opts) {
        Ok(c) => (Some(c.spectrum), c.converged, c.iterations),
        Err(_) => (None, false, 0),
    };
    let exact_verified = {
        let checks: Vec<Option<bool>> = e
            .solutions
            .iter()
            .map(|s| exact_residual_is_zero(s, spectrum, model))
            .collect();
        if checks.iter().all(|c| c.is_some()) {
            Some(checks.iter().all(|c| *c == Some(true)))
        } else {
            None
        }
    };
    Ok(ResonanceReport {
        spectrum: spectrum.clone(),
        orders: opts.orders.clone(),
        tol_res: e.tol_res,
        tol_k: e.tol_k,
        out_k: output_spectrum(spectrum, model.j, &opts.orders, e.tol_k),
        out_res: resonant_outputs(&e),
        solutions: e.solutions,
        internal,
        universal,
        skipped: e.skipped,
        selected,
        classification,
        closure: closure_spec,
        closure_converged: conv,
        closure_iterations: iters,
        exact_verified,
    })
}

/// Classifies `spectrum`: enumerates `P(S)`, `P_int(S)`, `P_univ(S)`,
/// computes `R(S)` and its closure, and extracts the condition rows of
/// non-universal internal solutions (equivalence classes keyed by `(b, c)`,
/// rows sorted lexicographically).
pub fn classify(
    spectrum: &NkSpectrum,
    model: &DispersionModel,
    opts: &ResonanceOptions,
) -> Result<ResonanceReport> {
    let e = enumerate_solutions(spectrum, model, opts)?;
    report_from(spectrum, model, opts, e)
}

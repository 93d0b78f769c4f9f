//! Group-velocity matching of spectrum pairs and partially GVM
//! decompositions.

use super::classify::classify;
use super::enumerate::{enumerate_solutions, ResonanceOptions, ResonanceSolution};
use super::spectrum::{dist, NkSpectrum};
use crate::dispersion::DispersionModel;
use crate::error::{invalid, Result};
use crate::sign::Sign;
use serde::{Deserialize, Serialize};

/// Outcome of [`gvm_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GvmReport {
    /// Per pair `l = 1..N`: whether `(n_l, k_{*l})` is group-velocity matched.
    pub flags: Vec<bool>,
    /// The largest sign-invariant GVM set, as 1-based pair indices.
    pub gvm_set: Vec<usize>,
    /// Group velocities `∇ω_{n_l}(k_{*l})`.
    pub velocities: Vec<Vec<f64>>,
    pub tol_gv: f64,
}

/// Group velocities of all pairs and the default matching tolerance
/// `1e-9(1 + max|∇ω|)`.
pub fn pair_velocities(
    spectrum: &NkSpectrum,
    model: &DispersionModel,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let v: Vec<Vec<f64>> = spectrum
        .pairs
        .iter()
        .map(|p| model.group_velocity(p.n, Sign::Plus, &p.k))
        .collect::<Result<_>>()?;
    let scale = v
        .iter()
        .map(|g| g.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok((v, 1e-9 * (1.0 + scale)))
}

/// A pair `l` is GVM when every resonant term feeding it — every solution
/// in `solutions` with `I(λ) = l` — has a component `(ζ_j, l_j)` with
/// `∇ω_{n_l}(k_{*l}) = ∇ω_{n_{l_j}}(k_{*l_j})` within `tol_gv`.
pub fn gvm_check(
    spectrum: &NkSpectrum,
    model: &DispersionModel,
    solutions: &[ResonanceSolution],
    tol_gv: Option<f64>,
) -> Result<GvmReport> {
    let (v, tol_default) = pair_velocities(spectrum, model)?;
    let tol_gv = tol_gv.unwrap_or(tol_default);
    let mut flags = vec![true; spectrum.len()];
    for s in solutions {
        let Some(i0) = s.class.internal_index() else {
            continue;
        };
        let matched = s
            .index
            .entries
            .iter()
            .any(|&(_, lj)| dist(&v[i0 - 1], &v[lj - 1]) <= tol_gv);
        if !matched {
            flags[i0 - 1] = false;
        }
    }
    let gvm_set = (1..=spectrum.len()).filter(|&l| flags[l - 1]).collect();
    Ok(GvmReport {
        flags,
        gvm_set,
        velocities: v,
        tol_gv,
    })
}

/// Outcome of [`partial_gvm_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialGvmReport {
    pub ok: bool,
    /// Condition (i): whether each part is resonance invariant.
    pub parts_invariant: Vec<bool>,
    /// Cross-interacting solutions violating condition (ii).
    pub violations: Vec<ResonanceSolution>,
}

/// Checks whether the partition `parts` (1-based pair indices) of the
/// spectrum is partially GVM: (i) every part is resonance invariant and
/// (ii) every solution with a cross-interacting index has two components in
/// different parts that are both GVM and have different group velocities.
pub fn partial_gvm_check(
    spectrum: &NkSpectrum,
    parts: &[Vec<usize>],
    model: &DispersionModel,
    opts: &ResonanceOptions,
) -> Result<PartialGvmReport> {
    let n = spectrum.len();
    let mut part_of = vec![usize::MAX; n];
    for (p, part) in parts.iter().enumerate() {
        for &l in part {
            if l == 0 || l > n {
                return invalid(format!("partition index {l} outside 1..={n}"));
            }
            if part_of[l - 1] != usize::MAX {
                return invalid(format!("pair {l} appears in two parts"));
            }
            part_of[l - 1] = p;
        }
    }
    if part_of.contains(&usize::MAX) {
        return invalid("the partition must cover every pair");
    }
    let mut parts_invariant = Vec::with_capacity(parts.len());
    for part in parts {
        let sub = NkSpectrum::new(part.iter().map(|&l| spectrum.pair(l).clone()).collect())?;
        parts_invariant.push(classify(&sub, model, opts)?.classification.is_invariant());
    }
    let e = enumerate_solutions(spectrum, model, opts)?;
    let gvm = gvm_check(spectrum, model, &e.solutions, None)?;
    let mut violations = Vec::new();
    for s in &e.solutions {
        let ls: Vec<usize> = s.index.entries.iter().map(|&(_, l)| l).collect();
        let ci = ls
            .iter()
            .any(|&a| ls.iter().any(|&b| part_of[a - 1] != part_of[b - 1]));
        if !ci {
            continue;
        }
        let good = ls.iter().any(|&a| {
            ls.iter().any(|&b| {
                part_of[a - 1] != part_of[b - 1]
                    && gvm.flags[a - 1]
                    && gvm.flags[b - 1]
                    && dist(&gvm.velocities[a - 1], &gvm.velocities[b - 1]) > gvm.tol_gv
            })
        });
        if !good {
            violations.push(s.clone());
        }
    }
    let ok = parts_invariant.iter().all(|&b| b) && violations.is_empty();
    Ok(PartialGvmReport {
        ok,
        parts_invariant,
        violations,
    })
}

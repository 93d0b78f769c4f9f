//! Index sets of the wavepacket interaction systems.
//!
//! For every output `(l, ϑ)` and order `m` the decorated indices
//! `λ = ((ζ′,l₁),…,(ζ^{(m)},l_m))` are sorted into
//!
//! * `resonant`: `Λ^m_{n_l,ϑ}`, the solutions of the resonance equation with
//!   output band `n_l` and sign `ϑ`;
//! * `diag`: the resonant indices with every `l_j = l`;
//! * `coup`: for a partition of the pairs, the resonant indices with two
//!   components in different parts;
//! * `red`: `resonant ∖ coup`.
//!
//! The full set `Λ^m` is every decorated index and is generated on demand.

use crate::dispersion::DispersionModel;
use crate::error::{invalid, Result};
use crate::resonance::{
    enumerate_solutions, kappa, omega_combination, DecoratedIndex, NkSpectrum, ResonanceOptions,
};
use crate::sign::Sign;
use serde::{Deserialize, Serialize};

/// Index sets of one order for one output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderSets {
    pub m: usize,
    pub resonant: Vec<DecoratedIndex>,
    pub diag: Vec<DecoratedIndex>,
    /// Empty until a partition is attached.
    pub coup: Vec<DecoratedIndex>,
    /// Equal to `resonant` until a partition is attached.
    pub red: Vec<DecoratedIndex>,
}

/// Index sets of one output `(l, ϑ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSets {
    /// 1-based pair index.
    pub l: usize,
    pub theta: Sign,
    /// Band `n_l`.
    pub n: usize,
    pub orders: Vec<OrderSets>,
}

/// A nearly resonant term: `tol_res < |Ω| ≤ tol_near` with output
/// wavevector at `ϑk_{*l}`. Averaging discards it although its phase is slow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearResonance {
    pub l: usize,
    pub theta: Sign,
    pub index: DecoratedIndex,
    pub omega: f64,
}

/// Which subset of the resonant indices a nonlinearity keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSelection {
    Resonant,
    Diag,
    Coup,
    Red,
}

/// Index sets for every output of a spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionIndexSets {
    pub n_pairs: usize,
    pub orders: Vec<usize>,
    pub tol_res: f64,
    pub tol_near: f64,
    pub tol_k: f64,
    /// Outputs ordered as `(1,+), (1,−), (2,+), …`.
    pub outputs: Vec<OutputSets>,
    /// Partition used for `coup`/`red` (1-based pair indices).
    pub partition: Option<Vec<Vec<usize>>>,
    pub near_resonant: Vec<NearResonance>,
}

/// Position of `(l, ϑ)` in the output ordering.
pub fn output_position(l: usize, theta: Sign) -> usize {
    2 * (l - 1) + usize::from(theta == Sign::Minus)
}

/// Builds the index sets. `tol_res` defaults to the resonance module's
/// tolerance; `tol_near` is `10·tol_res`.
pub fn build_index_sets(
    spectrum: &NkSpectrum,
    model: &DispersionModel,
    orders: &[usize],
    tol_res: Option<f64>,
) -> Result<InteractionIndexSets> {
    let mut opts = ResonanceOptions::new(orders);
    opts.tol_res = tol_res;
    let enumeration = enumerate_solutions(spectrum, model, &opts)?;
    let (tol_res, tol_k) = (enumeration.tol_res, enumeration.tol_k);
    let tol_near = 10.0 * tol_res;
    let n_pairs = spectrum.len();
    let mut ms = orders.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let mut outputs = Vec::with_capacity(2 * n_pairs);
    let mut near_resonant = Vec::new();
    for l in 1..=n_pairs {
        let n = spectrum.pair(l).n;
        for theta in Sign::BOTH {
            let mut per_order = Vec::with_capacity(ms.len());
            for &m in &ms {
                let resonant: Vec<DecoratedIndex> = enumeration
                    .solutions
                    .iter()
                    .filter(|s| s.m == m && s.n == n && s.zeta == theta)
                    .map(|s| s.index.clone())
                    .collect();
                let diag = resonant
                    .iter()
                    .filter(|x| x.entries.iter().all(|&(_, lj)| lj == l))
                    .cloned()
                    .collect();
                per_order.push(OrderSets {
                    m,
                    red: resonant.clone(),
                    resonant,
                    diag,
                    coup: Vec::new(),
                });
            }
            // nearly resonant terms landing on ϑk_{*l}
            let target: Vec<f64> = spectrum.pair(l).k.iter().map(|x| theta.f() * x).collect();
            for &m in &ms {
                for index in DecoratedIndex::all(m, n_pairs) {
                    let kap = kappa(&index, spectrum);
                    if kdist(&kap, &target) > tol_k {
                        continue;
                    }
                    let omega = omega_combination(&index, spectrum, model)?
                        - model.eval_omega(n, theta, &kap)?;
                    if omega.abs() > tol_res && omega.abs() <= tol_near {
                        log::warn!(
                            "near-resonant term {index} for output ({l},{theta}): |Ω| = {:.3e}",
                            omega.abs()
                        );
                        near_resonant.push(NearResonance {
                            l,
                            theta,
                            index,
                            omega,
                        });
                    }
                }
            }
            outputs.push(OutputSets {
                l,
                theta,
                n,
                orders: per_order,
            });
        }
    }
    Ok(InteractionIndexSets {
        n_pairs,
        orders: ms,
        tol_res,
        tol_near,
        tol_k,
        outputs,
        partition: None,
        near_resonant,
    })
}

impl InteractionIndexSets {
    /// Sets of output `(l, ϑ)`.
    pub fn output(&self, l: usize, theta: Sign) -> &OutputSets {
        &self.outputs[output_position(l, theta)]
    }

    /// Full set `Λ^m` (every decorated index of order `m`).
    pub fn full(&self, m: usize) -> Vec<DecoratedIndex> {
        DecoratedIndex::all(m, self.n_pairs)
    }

    /// Attaches a partition of the pairs (1-based, disjoint, covering) and
    /// fills the `coup` and `red` sets.
    pub fn with_partition(mut self, parts: &[Vec<usize>]) -> Result<Self> {
        let part_of = partition_map(parts, self.n_pairs)?;
        for out in &mut self.outputs {
            for o in &mut out.orders {
                let crosses = |x: &DecoratedIndex| {
                    x.entries.iter().any(|&(_, a)| {
                        x.entries
                            .iter()
                            .any(|&(_, b)| part_of[a - 1] != part_of[b - 1])
                    })
                };
                o.coup = o.resonant.iter().filter(|x| crosses(x)).cloned().collect();
                o.red = o.resonant.iter().filter(|x| !crosses(x)).cloned().collect();
            }
        }
        self.partition = Some(parts.to_vec());
        Ok(self)
    }

    /// The selected subset for output `(l, ϑ)` and order `m` (empty when the
    /// order is absent).
    pub fn select(
        &self,
        l: usize,
        theta: Sign,
        m: usize,
        which: IndexSelection,
    ) -> &[DecoratedIndex] {
        let out = self.output(l, theta);
        match out.orders.iter().find(|o| o.m == m) {
            None => &[],
            Some(o) => match which {
                IndexSelection::Resonant => &o.resonant,
                IndexSelection::Diag => &o.diag,
                IndexSelection::Coup => &o.coup,
                IndexSelection::Red => &o.red,
            },
        }
    }

    /// Resonant indices of `(l, ϑ)` whose output wavevector `ϑκ_m(λ)` is
    /// `k_{*l}`: the terms that survive the cutoff around `ϑk_{*l}`.
    pub fn matched(
        &self,
        spectrum: &NkSpectrum,
        l: usize,
        theta: Sign,
        m: usize,
    ) -> Vec<DecoratedIndex> {
        let target: Vec<f64> = spectrum.pair(l).k.iter().map(|x| theta.f() * x).collect();
        self.select(l, theta, m, IndexSelection::Resonant)
            .iter()
            .filter(|x| kdist(&kappa(x, spectrum), &target) <= self.tol_k)
            .cloned()
            .collect()
    }

    /// Checks that every matched resonant index of `(l, ϑ)` has a component
    /// with `l_j = l`; returns the offending indices.
    pub fn self_interaction_violations(
        &self,
        spectrum: &NkSpectrum,
    ) -> Vec<(usize, Sign, DecoratedIndex)> {
        let mut bad = Vec::new();
        for out in &self.outputs {
            for &m in &self.orders {
                for x in self.matched(spectrum, out.l, out.theta, m) {
                    if !x.entries.iter().any(|&(_, lj)| lj == out.l) {
                        bad.push((out.l, out.theta, x));
                    }
                }
            }
        }
        bad
    }
}

/// Euclidean distance of two wavevectors.
pub(crate) fn kdist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Part number of every pair, validating the partition.
pub(crate) fn partition_map(parts: &[Vec<usize>], n: usize) -> Result<Vec<usize>> {
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
    Ok(part_of)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonance::{classify, Classification};

    fn idx(e: &[(i32, usize)]) -> DecoratedIndex {
        DecoratedIndex::new(
            e.iter()
                .map(|&(z, l)| (if z > 0 { Sign::Plus } else { Sign::Minus }, l))
                .collect(),
        )
    }

    fn counterprop() -> (DispersionModel, NkSpectrum) {
        (
            DispersionModel::quadratic(1, 1.0, 1.0).unwrap(),
            NkSpectrum::from_1d(&[(1, 1.0), (1, -1.0)]).unwrap(),
        )
    }

    #[test]
    fn counterprop_resonant_set_matches_universal_solutions() {
        let (m, s) = counterprop();
        let sets = build_index_sets(&s, &m, &[3], None).unwrap();
        let report = classify(&s, &m, &ResonanceOptions::new(&[3])).unwrap();
        assert_eq!(report.classification, Classification::UniversallyInvariant);
        let want: Vec<DecoratedIndex> = report
            .solutions
            .iter()
            .filter(|x| x.zeta == Sign::Plus && x.n == 1)
            .map(|x| x.index.clone())
            .collect();
        // both pairs share band 1, so Λ³_{1,+} is the same for l = 1, 2
        assert_eq!(
            sets.select(1, Sign::Plus, 3, IndexSelection::Resonant),
            want.as_slice()
        );
        assert_eq!(
            sets.select(2, Sign::Plus, 3, IndexSelection::Resonant),
            want.as_slice()
        );
        assert_eq!(want.len(), 18);
        // self-phase and cross-phase terms with their permutations
        let matched = sets.matched(&s, 1, Sign::Plus, 3);
        for x in [
            idx(&[(1, 1), (1, 1), (-1, 1)]),
            idx(&[(-1, 1), (1, 1), (1, 1)]),
            idx(&[(1, 1), (1, 2), (-1, 2)]),
            idx(&[(-1, 2), (1, 2), (1, 1)]),
        ] {
            assert!(matched.contains(&x), "{x}");
        }
        assert_eq!(matched.len(), 9);
        assert!(sets.self_interaction_violations(&s).is_empty());
        assert!(sets.near_resonant.is_empty());
    }

    #[test]
    fn diag_is_all_l_and_subset_of_resonant() {
        let (m, s) = counterprop();
        let sets = build_index_sets(&s, &m, &[3], None).unwrap();
        for out in &sets.outputs {
            let o = &out.orders[0];
            assert!(o.diag.iter().all(|x| o.resonant.contains(x)));
            assert!(o
                .diag
                .iter()
                .all(|x| x.entries.iter().all(|&(_, l)| l == out.l)));
            let all_l = DecoratedIndex::all(3, 2)
                .into_iter()
                .filter(|x| x.entries.iter().all(|&(_, l)| l == out.l) && o.resonant.contains(x))
                .count();
            assert_eq!(o.diag.len(), all_l);
        }
        // l = 1, ϑ = + : the three arrangements of ((+,1),(+,1),(−,1))
        assert_eq!(sets.select(1, Sign::Plus, 3, IndexSelection::Diag).len(), 3);
    }

    #[test]
    fn partition_splits_resonant_into_coupling_and_reduced() {
        let (m, s) = counterprop();
        let sets = build_index_sets(&s, &m, &[3], None)
            .unwrap()
            .with_partition(&[vec![1], vec![2]])
            .unwrap();
        for out in &sets.outputs {
            let o = &out.orders[0];
            assert_eq!(o.coup.len() + o.red.len(), o.resonant.len());
            assert!(o.coup.iter().all(|x| !o.diag.contains(x)));
            // singleton parts: reduced = diagonal for the matched outputs
            for x in &o.red {
                let l0 = x.entries[0].1;
                assert!(x.entries.iter().all(|&(_, l)| l == l0));
            }
        }
        let whole = build_index_sets(&s, &m, &[3], None)
            .unwrap()
            .with_partition(&[vec![1, 2]])
            .unwrap();
        assert!(whole.outputs.iter().all(|o| o.orders[0].coup.is_empty()));
        assert!(build_index_sets(&s, &m, &[3], None)
            .unwrap()
            .with_partition(&[vec![1]])
            .is_err());
        assert!(build_index_sets(&s, &m, &[3], None)
            .unwrap()
            .with_partition(&[vec![1, 2], vec![2]])
            .is_err());
    }

    #[test]
    fn quadratic_without_second_harmonic_has_empty_sets() {
        let m = DispersionModel::quadratic(1, 1.0, 1.0).unwrap();
        let s = NkSpectrum::from_1d(&[(1, 1.0)]).unwrap();
        let sets = build_index_sets(&s, &m, &[2], None).unwrap();
        for out in &sets.outputs {
            assert!(out.orders[0].resonant.is_empty());
        }
        assert_eq!(sets.full(2).len(), 4);
    }

    #[test]
    fn second_harmonic_terms() {
        // ω = k² + 2, S = {(1,1),(1,2)}: ω(2) = 2ω(1)
        let m = DispersionModel::quadratic(1, 1.0, 2.0).unwrap();
        let s = NkSpectrum::from_1d(&[(1, 1.0), (1, 2.0)]).unwrap();
        let sets = build_index_sets(&s, &m, &[2], None).unwrap();
        // U₂ is driven by U₁²
        assert_eq!(
            sets.matched(&s, 2, Sign::Plus, 2),
            vec![idx(&[(1, 1), (1, 1)])]
        );
        // U₁ is driven by U₂U₁*
        let mut m1 = sets.matched(&s, 1, Sign::Plus, 2);
        m1.sort();
        assert_eq!(m1, vec![idx(&[(1, 2), (-1, 1)]), idx(&[(-1, 1), (1, 2)])]);
        // the harmonic is generated from the fundamental alone
        let bad = sets.self_interaction_violations(&s);
        assert_eq!(bad.len(), 2);
        assert!(bad
            .iter()
            .all(|(l, _, x)| *l == 2 && x.entries.iter().all(|e| e.1 == 1)));
    }

    #[test]
    fn near_resonance_is_reported() {
        // ω = k² + 2 + 1e-7 detunes the second harmonic slightly
        let m = DispersionModel::quadratic(1, 1.0, 2.0 + 1e-7).unwrap();
        let s = NkSpectrum::from_1d(&[(1, 1.0), (1, 2.0)]).unwrap();
        let sets = build_index_sets(&s, &m, &[2], Some(2e-8)).unwrap();
        assert!(sets.matched(&s, 2, Sign::Plus, 2).is_empty());
        assert!(sets
            .near_resonant
            .iter()
            .any(|x| x.l == 2 && x.theta == Sign::Plus));
    }
}

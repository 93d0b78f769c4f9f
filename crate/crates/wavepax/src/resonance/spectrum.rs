//! nk-spectra and decorated indices.

use crate::dispersion::DispersionModel;
use crate::error::{invalid, Result};
use crate::sign::Sign;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A band index paired with a principal wavevector.
#[derive(Clone, Debug, PartialEq)]
pub struct NkPair {
    /// Band index `n ∈ 1..=J`.
    pub n: usize,
    /// Principal wavevector `k_*`.
    pub k: Vec<f64>,
}

impl NkPair {
    pub fn new(n: usize, k: Vec<f64>) -> Self {
        NkPair { n, k }
    }

    /// Whether two pairs agree up to the wavevector tolerance `tol_k`.
    pub fn approx_eq(&self, other: &NkPair, tol_k: f64) -> bool {
        self.n == other.n && dist(&self.k, &other.k) <= tol_k
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Total order on wavevectors used for deterministic output.
pub(crate) fn cmp_k(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

impl Serialize for NkPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(1 + self.k.len()))?;
        seq.serialize_element(&self.n)?;
        for x in &self.k {
            seq.serialize_element(x)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for NkPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<f64> = Vec::deserialize(d)?;
        if v.len() < 2 {
            return Err(D::Error::custom("an nk-pair is [n, k₁, …, k_d]"));
        }
        if v[0] < 1.0 || v[0].fract() != 0.0 {
            return Err(D::Error::custom(format!(
                "band index must be a positive integer, got {}",
                v[0]
            )));
        }
        Ok(NkPair {
            n: v[0] as usize,
            k: v[1..].to_vec(),
        })
    }
}

/// Finite set `S = {(n_l, k_{*l})}` of distinct nk-pairs, `l = 1..N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NkSpectrum {
    pub pairs: Vec<NkPair>,
}

impl NkSpectrum {
    /// Validated constructor: pairs must be distinct, of equal dimension.
    pub fn new(pairs: Vec<NkPair>) -> Result<Self> {
        if let Some(first) = pairs.first() {
            let d = first.k.len();
            if d == 0 || pairs.iter().any(|p| p.k.len() != d) {
                return invalid("all wavevectors of a spectrum must share one positive dimension");
            }
        }
        if pairs.iter().any(|p| p.n == 0) {
            return invalid("band indices are 1-based");
        }
        for (i, a) in pairs.iter().enumerate() {
            for b in &pairs[i + 1..] {
                if a.n == b.n && a.k == b.k {
                    return invalid(format!("duplicate nk-pair ({}, {:?})", a.n, a.k));
                }
            }
        }
        Ok(NkSpectrum { pairs })
    }

    /// Shorthand for one-dimensional spectra `[(n, k), …]`.
    pub fn from_1d(pairs: &[(usize, f64)]) -> Result<Self> {
        NkSpectrum::new(
            pairs
                .iter()
                .map(|&(n, k)| NkPair::new(n, vec![k]))
                .collect(),
        )
    }

    /// Number of pairs `N`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Dimension of the wavevectors (0 for the empty spectrum).
    pub fn dim(&self) -> usize {
        self.pairs.first().map_or(0, |p| p.k.len())
    }

    /// Pair `l` (1-based).
    pub fn pair(&self, l: usize) -> &NkPair {
        &self.pairs[l - 1]
    }

    /// Distinct wavevectors `K_S` in order of first appearance.
    pub fn k_spectrum(&self, tol_k: f64) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for p in &self.pairs {
            if !out.iter().any(|k| dist(k, &p.k) <= tol_k) {
                out.push(p.k.clone());
            }
        }
        out
    }

    /// Index `l` (1-based) of the pair matching `(n, k)` under `tol_k`.
    pub fn find(&self, n: usize, k: &[f64], tol_k: f64) -> Option<usize> {
        self.pairs
            .iter()
            .position(|p| p.n == n && dist(&p.k, k) <= tol_k)
            .map(|i| i + 1)
    }

    /// Set equality under `tol_k`.
    pub fn set_eq(&self, other: &NkSpectrum, tol_k: f64) -> bool {
        self.pairs
            .iter()
            .all(|p| other.find(p.n, &p.k, tol_k).is_some())
            && other
                .pairs
                .iter()
                .all(|p| self.find(p.n, &p.k, tol_k).is_some())
    }

    /// Default wavevector tolerance `1e-9(1 + max|k_{*l}|)`.
    pub fn default_tol_k(&self) -> f64 {
        let m = self
            .pairs
            .iter()
            .map(|p| p.k.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        1e-9 * (1.0 + m)
    }

    /// Default resonance tolerance `1e-9(1 + max_l|ω_{n_l}(k_{*l})|)`.
    pub fn default_tol_res(&self, model: &DispersionModel) -> f64 {
        let m = self
            .pairs
            .iter()
            .filter_map(|p| model.eval_omega_unchecked(p.n, Sign::Plus, &p.k).ok())
            .fold(0.0, |a: f64, w| a.max(w.abs()));
        1e-9 * (1.0 + m)
    }

    /// Checks that every band index exists in `model` and the dimension matches.
    pub fn check_against(&self, model: &DispersionModel) -> Result<()> {
        for (l, p) in self.pairs.iter().enumerate() {
            if p.n > model.j {
                return invalid(format!(
                    "pair {} uses band {} but the model has J = {}",
                    l + 1,
                    p.n,
                    model.j
                ));
            }
            if p.k.len() != model.d {
                return invalid(format!(
                    "pair {} has dimension {}, model has {}",
                    l + 1,
                    p.k.len(),
                    model.d
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for NkSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}, {:?})", p.n, p.k)?;
        }
        f.write_str("}")
    }
}

/// Decorated index `λ = ((ζ′, l₁), …, (ζ^{(m)}, l_m))` with 1-based `l_j`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecoratedIndex {
    pub entries: Vec<(Sign, usize)>,
}

impl DecoratedIndex {
    pub fn new(entries: Vec<(Sign, usize)>) -> Self {
        DecoratedIndex { entries }
    }

    /// Interaction order `m`.
    pub fn m(&self) -> usize {
        self.entries.len()
    }

    /// `−λ`: all signs flipped.
    pub fn negated(&self) -> DecoratedIndex {
        DecoratedIndex {
            entries: self.entries.iter().map(|&(z, l)| (z.flip(), l)).collect(),
        }
    }

    /// Checks the entries against a spectrum of `n` pairs.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.entries.is_empty() {
            return invalid("decorated index must be nonempty");
        }
        if let Some(&(_, l)) = self.entries.iter().find(|&&(_, l)| l == 0 || l > n) {
            return invalid(format!("index entry l = {l} outside 1..={n}"));
        }
        Ok(())
    }

    /// `δ_l = Σ_{j: l_j = l} ζ^{(j)}` for `l = 1..n`.
    pub fn delta(&self, n: usize) -> Vec<i64> {
        let mut d = vec![0i64; n];
        for &(z, l) in &self.entries {
            d[l - 1] += z.value();
        }
        d
    }

    /// Cardinalities `c_l = |{j : l_j = l}|`.
    pub fn counts(&self, n: usize) -> Vec<usize> {
        let mut c = vec![0usize; n];
        for &(_, l) in &self.entries {
            c[l - 1] += 1;
        }
        c
    }

    /// All indices of order `m` over `n` pairs in lexicographic order.
    pub fn all(m: usize, n: usize) -> Vec<DecoratedIndex> {
        let base = 2 * n;
        let total = base.pow(m as u32);
        let mut out = Vec::with_capacity(total);
        for code in 0..total {
            let mut c = code;
            let mut e = vec![(Sign::Plus, 1); m];
            for j in (0..m).rev() {
                let digit = c % base;
                c /= base;
                let zeta = if digit < n { Sign::Plus } else { Sign::Minus };
                e[j] = (zeta, digit % n + 1);
            }
            out.push(DecoratedIndex { entries: e });
        }
        out
    }
}

impl fmt::Display for DecoratedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (z, l)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({z},{l})")?;
        }
        f.write_str(")")
    }
}

/// `κ_m(λ) = Σ_j ζ^{(j)} k_{*l_j}`.
pub fn kappa(index: &DecoratedIndex, spectrum: &NkSpectrum) -> Vec<f64> {
    let mut k = vec![0.0; spectrum.dim()];
    for &(z, l) in &index.entries {
        for (a, x) in spectrum.pair(l).k.iter().enumerate() {
            k[a] += z.f() * x;
        }
    }
    k
}

/// `Ω_{1,m}(λ) = Σ_j ω_{n_{l_j},ζ^{(j)}}(ζ^{(j)}k_{*l_j})`, which equals
/// `Σ_j ζ^{(j)} ω_{n_{l_j}}(k_{*l_j})` under the diagonal symmetry.
pub fn omega_combination(
    index: &DecoratedIndex,
    spectrum: &NkSpectrum,
    model: &DispersionModel,
) -> Result<f64> {
    let mut s = 0.0;
    for &(z, l) in &index.entries {
        let p = spectrum.pair(l);
        let zk: Vec<f64> = p.k.iter().map(|x| z.f() * x).collect();
        s += model.eval_omega(p.n, z, &zk)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(e: &[(i32, usize)]) -> DecoratedIndex {
        DecoratedIndex::new(
            e.iter()
                .map(|&(z, l)| (if z > 0 { Sign::Plus } else { Sign::Minus }, l))
                .collect(),
        )
    }

    #[test]
    fn kappa_examples() {
        let s1 = NkSpectrum::from_1d(&[(1, 0.7)]).unwrap();
        assert_eq!(kappa(&idx(&[(1, 1), (-1, 1), (1, 1)]), &s1), vec![0.7]);
        assert_eq!(kappa(&idx(&[(1, 1), (1, 1)]), &s1), vec![1.4]);
        let s2 = NkSpectrum::from_1d(&[(1, 0.7), (1, -0.7)]).unwrap();
        assert_eq!(kappa(&idx(&[(1, 1), (-1, 1), (1, 2)]), &s2), vec![-0.7]);
        assert_eq!(idx(&[(1, 1), (-1, 1), (1, 2)]).delta(2), vec![0, 1]);
    }

    #[test]
    fn omega_combination_examples() {
        let m = DispersionModel::quadratic(1, 1.0, 0.0).unwrap();
        let s = NkSpectrum::from_1d(&[(1, 1.0)]).unwrap();
        assert_eq!(
            omega_combination(&idx(&[(1, 1), (1, 1)]), &s, &m).unwrap(),
            2.0
        );
        assert_eq!(
            omega_combination(&idx(&[(1, 1), (-1, 1), (1, 1)]), &s, &m).unwrap(),
            1.0
        );
        assert_eq!(
            omega_combination(&idx(&[(1, 1), (1, 1), (1, 1)]), &s, &m).unwrap(),
            3.0
        );
    }

    #[test]
    fn enumeration_order_and_size() {
        let all = DecoratedIndex::all(2, 2);
        assert_eq!(all.len(), 16);
        assert_eq!(all[0], idx(&[(1, 1), (1, 1)]));
        assert_eq!(all[1], idx(&[(1, 1), (1, 2)]));
        assert_eq!(all[2], idx(&[(1, 1), (-1, 1)]));
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
    }

    #[test]
    fn spectrum_json_round_trip() {
        let s: NkSpectrum = serde_json::from_str("[[1, 0.5], [1, -0.5]]").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[1,0.5],[1,-0.5]]");
        assert!(serde_json::from_str::<NkSpectrum>("[[0.5, 1.0]]").is_err());
        assert!(NkSpectrum::from_1d(&[(1, 1.0), (1, 1.0)]).is_err());
    }
}

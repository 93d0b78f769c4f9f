//! Named model presets and tabulated matrix symbols.

use super::model::{DispersionModel, ScalarBand, SymbolFn};
use crate::error::{invalid, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

fn one() -> usize {
    1
}

/// Model description as it appears in run configurations.
///
/// `preset` is one of `"nls1d"` (`ω = a₂|k|² + a₀`), `"power"`
/// (`ω = |k|^p + a₀`), `"twoband"` (bands `a|k|² + a₀` and `c|k| + a₀`) or
/// `"matrix:<file>"` (tabulated one-dimensional symbol, see
/// [`TabulatedSymbol`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub preset: String,
    #[serde(default = "one")]
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl ModelConfig {
    /// `nls1d` preset with the given coefficients.
    pub fn nls(a2: f64, a0: f64) -> Self {
        ModelConfig {
            preset: "nls1d".into(),
            d: 1,
            a2: Some(a2),
            a0: Some(a0),
            p: None,
            a: None,
            c: None,
        }
    }

    /// `power` preset.
    pub fn power(p: f64, a0: f64) -> Self {
        ModelConfig {
            preset: "power".into(),
            d: 1,
            a2: None,
            a0: Some(a0),
            p: Some(p),
            a: None,
            c: None,
        }
    }

    /// Instantiates the model. Relative `matrix:` paths are resolved
    /// against `base_dir` when given.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<DispersionModel> {
        let a0 = self.a0.unwrap_or(0.0);
        match self.preset.as_str() {
            "nls1d" => DispersionModel::scalar(
                self.d,
                vec![ScalarBand::Quadratic {
                    a2: self.a2.unwrap_or(1.0),
                    a0,
                }],
                "nls1d",
            ),
            "power" => {
                let p = self.p.unwrap_or(2.0);
                if !(p > 0.0) {
                    return invalid(format!("power exponent must be positive, got {p}"));
                }
                DispersionModel::scalar(self.d, vec![ScalarBand::Power { p, a0 }], "power")
            }
            "twoband" => DispersionModel::scalar(
                self.d,
                vec![
                    ScalarBand::Quadratic {
                        a2: self.a.unwrap_or(1.0),
                        a0,
                    },
                    ScalarBand::Linear {
                        c: self.c.unwrap_or(2.0),
                        a0,
                    },
                ],
                "twoband",
            ),
            other => {
                if let Some(file) = other.strip_prefix("matrix:") {
                    if self.d != 1 {
                        return invalid("tabulated matrix symbols are one-dimensional");
                    }
                    let path = match base_dir {
                        Some(b) if Path::new(file).is_relative() => b.join(file),
                        _ => Path::new(file).to_path_buf(),
                    };
                    let text = std::fs::read_to_string(&path)?;
                    let tab: TabulatedSymbol = serde_json::from_str(&text)?;
                    tab.into_model(other)
                } else {
                    invalid(format!("unknown model preset '{other}'"))
                }
            }
        }
    }
}

/// One-dimensional symbol tabulated on increasing wavevectors; entries are
/// `[re, im]` pairs, rows of a `2J × 2J` Hermitian matrix. Between nodes the
/// matrix is interpolated linearly; outside the table the evaluation fails
/// (which marks the wavevector as band-crossing).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedSymbol {
    pub k: Vec<f64>,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

impl TabulatedSymbol {
    /// Validates and converts into a matrix model.
    pub fn into_model(self, name: &str) -> Result<DispersionModel> {
        if self.k.len() < 2 || self.k.len() != self.matrices.len() {
            return invalid("tabulated symbol needs ≥ 2 wavevectors and one matrix per wavevector");
        }
        if self.k.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("tabulated wavevectors must be strictly increasing");
        }
        let dim = self.matrices[0].len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return invalid("tabulated matrices must be 2J × 2J");
        }
        let mut mats = Vec::with_capacity(self.k.len());
        for m in &self.matrices {
            if m.len() != dim || m.iter().any(|r| r.len() != dim) {
                return invalid("tabulated matrices must all be square of the same size");
            }
            let mat = DMatrix::from_fn(dim, dim, |r, c| Complex64::new(m[r][c][0], m[r][c][1]));
            if (&mat - mat.adjoint()).camax() > 1e-12 * (1.0 + mat.camax()) {
                return invalid("tabulated matrix is not Hermitian");
            }
            mats.push(mat);
        }
        let ks = self.k;
        let f: SymbolFn = Arc::new(move |k: &[f64]| {
            let x = k[0];
            if x < ks[0] || x > ks[ks.len() - 1] {
                return None;
            }
            let i = match ks.partition_point(|&v| v <= x) {
                0 => 0,
                p if p >= ks.len() => ks.len() - 2,
                p => p - 1,
            };
            let t = (x - ks[i]) / (ks[i + 1] - ks[i]);
            Some(&mats[i] * Complex64::new(1.0 - t, 0.0) + &mats[i + 1] * Complex64::new(t, 0.0))
        });
        DispersionModel::matrix(1, dim / 2, f, name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sign::Sign;

    #[test]
    fn presets_build() {
        let m = ModelConfig::nls(1.0, 0.0).build(None).unwrap();
        assert_eq!(m.eval_omega(1, Sign::Plus, &[2.0]).unwrap(), 4.0);
        let p = ModelConfig::power(3.0, 12.0).build(None).unwrap();
        assert_eq!(p.eval_omega(1, Sign::Plus, &[1.0]).unwrap(), 13.0);
        let t: ModelConfig = serde_json::from_str(r#"{"preset":"twoband"}"#).unwrap();
        let t = t.build(None).unwrap();
        assert_eq!(t.j, 2);
        assert!(serde_json::from_str::<ModelConfig>(r#"{"preset":"nls1d","b":1}"#).is_err());
        assert!(ModelConfig {
            preset: "bogus".into(),
            ..ModelConfig::nls(1.0, 0.0)
        }
        .build(None)
        .is_err());
    }

    #[test]
    fn tabulated_symbol_interpolates() {
        let dir = tempfile::tempdir().unwrap();
        // diag(k²+1, −k²−1) sampled at k ∈ {0, 1, 2}; interpolation is exact at nodes
        let mats: Vec<Vec<Vec<[f64; 2]>>> = [0.0f64, 1.0, 2.0]
            .iter()
            .map(|k| {
                vec![
                    vec![[k * k + 1.0, 0.0], [0.0, 0.0]],
                    vec![[0.0, 0.0], [-k * k - 1.0, 0.0]],
                ]
            })
            .collect();
        let tab = TabulatedSymbol {
            k: vec![0.0, 1.0, 2.0],
            matrices: mats,
        };
        std::fs::write(
            dir.path().join("sym.json"),
            serde_json::to_string(&tab).unwrap(),
        )
        .unwrap();
        let cfg = ModelConfig {
            preset: "matrix:sym.json".into(),
            ..ModelConfig::nls(1.0, 0.0)
        };
        let cfg = ModelConfig {
            a2: None,
            a0: None,
            ..cfg
        };
        let m = cfg.build(Some(dir.path())).unwrap();
        assert!((m.eval_omega(1, Sign::Plus, &[1.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!((m.eval_omega(1, Sign::Plus, &[1.5]).unwrap() - 3.5).abs() < 1e-12);
        assert!((m.eval_omega(1, Sign::Minus, &[1.5]).unwrap() + 3.5).abs() < 1e-12);
        assert!(m.is_band_crossing(&[2.5]));
    }
}

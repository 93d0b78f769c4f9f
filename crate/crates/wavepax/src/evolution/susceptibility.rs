//! Polynomial convolution nonlinearities `F = Σ_m F^{(m)}` described by
//! susceptibilities `χ^{(m)}`.
//!
//! A susceptibility of order `m` is a sum of monomials
//! `F_c(k) += coef · ∫ K(k, k⃗) Û_{i₁}(k′)…Û_{i_m}(k^{(m)}) d̃k⃗`, where `c` is the output
//! component, `(i₁,…,i_m)` the input components and `K` an optional kernel
//! (constant `1` when absent). The measure is `d̃k = (2π)^{−d}dk` and
//! `k^{(m)} = k − k′ − … − k^{(m−1)}`.

use crate::error::{invalid, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Kernel `K(k, [k′, …, k^{(m)}])` of a non-constant susceptibility.
pub type KernelFn = Arc<dyn Fn(&[f64], &[&[f64]]) -> Complex64 + Send + Sync>;

/// One monomial of a susceptibility.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    /// Output component.
    pub out: usize,
    /// Coefficient as `[re, im]`.
    pub coef: [f64; 2],
    /// Input component of each argument slot.
    pub inputs: Vec<usize>,
}

impl Monomial {
    pub fn new(out: usize, coef: Complex64, inputs: Vec<usize>) -> Self {
        Monomial {
            out,
            coef: [coef.re, coef.im],
            inputs,
        }
    }

    #[inline]
    pub fn coefficient(&self) -> Complex64 {
        Complex64::new(self.coef[0], self.coef[1])
    }
}

/// Susceptibility `χ^{(m)}` of a fixed order.
#[derive(Clone)]
pub struct Susceptibility {
    pub order: usize,
    pub monomials: Vec<Monomial>,
    /// Optional wavevector-dependent kernel (`|K| ≤ 1` is assumed for the
    /// bound `c_chi`). Kernels are only supported by direct convolution.
    pub kernel: Option<KernelFn>,
}

impl fmt::Debug for Susceptibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Susceptibility")
            .field("order", &self.order)
            .field("monomials", &self.monomials)
            .field("kernel", &self.kernel.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl Susceptibility {
    /// Constant-tensor susceptibility.
    pub fn constant(order: usize, monomials: Vec<Monomial>) -> Result<Self> {
        let s = Susceptibility {
            order,
            monomials,
            kernel: None,
        };
        s.check_shape()?;
        Ok(s)
    }

    /// Susceptibility with a kernel.
    pub fn with_kernel(order: usize, monomials: Vec<Monomial>, kernel: KernelFn) -> Result<Self> {
        let s = Susceptibility {
            order,
            monomials,
            kernel: Some(kernel),
        };
        s.check_shape()?;
        Ok(s)
    }

    fn check_shape(&self) -> Result<()> {
        if self.order < 2 {
            return invalid(format!(
                "susceptibility order must be ≥ 2, got {}",
                self.order
            ));
        }
        for mono in &self.monomials {
            if mono.inputs.len() != self.order {
                return invalid(format!(
                    "monomial has {} inputs, order is {}",
                    mono.inputs.len(),
                    self.order
                ));
            }
            if !mono.coef.iter().all(|x| x.is_finite()) {
                return invalid("monomial coefficient is not finite");
            }
        }
        Ok(())
    }

    /// Validates component indices against `ncomp`.
    pub fn validate(&self, ncomp: usize) -> Result<()> {
        self.check_shape()?;
        for mono in &self.monomials {
            if mono.out >= ncomp || mono.inputs.iter().any(|&i| i >= ncomp) {
                return invalid(format!("monomial component index outside 0..{ncomp}"));
            }
        }
        Ok(())
    }

    /// Tensor norm: `max_c Σ_{monomials → c} |coef|` (sup over `k` of the
    /// kernel is taken as 1).
    pub fn tensor_norm(&self) -> f64 {
        let mut per_out = std::collections::BTreeMap::<usize, f64>::new();
        for mono in &self.monomials {
            *per_out.entry(mono.out).or_default() += mono.coefficient().norm();
        }
        per_out.values().cloned().fold(0.0, f64::max)
    }

    /// Bound `c_chi` of the discretized operator including the convolution
    /// measure `(2π)^{−(m−1)d}`.
    pub fn c_chi(&self, d: usize) -> f64 {
        self.tensor_norm() * (2.0 * PI).powi(-(((self.order - 1) * d) as i32))
    }
}

/// A full nonlinearity `F = Σ_m F^{(m)}`.
#[derive(Clone, Debug, Default)]
pub struct Nonlinearity {
    pub terms: Vec<Susceptibility>,
}

impl Nonlinearity {
    pub fn new(terms: Vec<Susceptibility>) -> Self {
        Nonlinearity { terms }
    }

    /// `F = 0`.
    pub fn zero() -> Self {
        Nonlinearity { terms: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.monomials.is_empty())
    }

    /// Orders present (`M_F`).
    pub fn orders(&self) -> Vec<usize> {
        let mut o: Vec<usize> = self
            .terms
            .iter()
            .filter(|t| !t.monomials.is_empty())
            .map(|t| t.order)
            .collect();
        o.sort_unstable();
        o.dedup();
        o
    }

    /// Largest order `m_F` (0 for `F = 0`).
    pub fn max_order(&self) -> usize {
        self.orders().last().copied().unwrap_or(0)
    }

    pub fn validate(&self, ncomp: usize) -> Result<()> {
        self.terms.iter().try_for_each(|t| t.validate(ncomp))
    }

    /// Largest `c_chi` over the terms.
    pub fn c_chi(&self, d: usize) -> f64 {
        self.terms.iter().map(|t| t.c_chi(d)).fold(0.0, f64::max)
    }

    /// Lipschitz heuristic `C_F ≈ c_chi·m_F²·(4R)^{m_F−1}` on the ball of radius `R`.
    pub fn lipschitz_constant(&self, d: usize, radius: f64) -> f64 {
        let m = self.max_order();
        if m == 0 {
            return 0.0;
        }
        self.c_chi(d) * (m * m) as f64 * (4.0 * radius).powi(m as i32 - 1)
    }

    /// Kerr-type cubic nonlinearity on one band (`J = 1`):
    /// `F₊ = iq U₊²U₋`, `F₋ = −iq U₋²U₊`.
    pub fn kerr(q: f64) -> Self {
        let i = Complex64::new(0.0, q);
        Nonlinearity::new(vec![Susceptibility::constant(
            3,
            vec![
                Monomial::new(0, i, vec![0, 0, 1]),
                Monomial::new(1, -i, vec![1, 1, 0]),
            ],
        )
        .expect("valid shape")])
    }

    /// Real-field power nonlinearity on one band: with `U = U₊ + U₋`,
    /// `F₊ = iq U^m`, `F₋ = −iq U^m`, expanded into all `2^m` monomials.
    pub fn power_real(m: usize, q: f64) -> Result<Self> {
        if m < 2 {
            return invalid("power nonlinearity needs m ≥ 2");
        }
        let mut monos = Vec::with_capacity(2usize.pow(m as u32 + 1));
        for (out, s) in [(0usize, 1.0), (1usize, -1.0)] {
            for bits in 0..(1usize << m) {
                let inputs = (0..m).map(|j| (bits >> j) & 1).collect();
                monos.push(Monomial::new(out, Complex64::new(0.0, s * q), inputs));
            }
        }
        Ok(Nonlinearity::new(vec![Susceptibility::constant(m, monos)?]))
    }
}

/// Declarative nonlinearity description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    /// No nonlinearity.
    None,
    /// [`Nonlinearity::kerr`].
    Kerr { q: f64 },
    /// [`Nonlinearity::power_real`].
    Power { m: usize, q: f64 },
    /// Explicit constant tensors, grouped by order.
    Monomials { terms: Vec<MonomialTerm> },
}

/// One order of an explicit nonlinearity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialTerm {
    pub order: usize,
    pub monomials: Vec<Monomial>,
}

impl NonlinearityConfig {
    pub fn build(&self) -> Result<Nonlinearity> {
        match self {
            NonlinearityConfig::None => Ok(Nonlinearity::zero()),
            NonlinearityConfig::Kerr { q } => Ok(Nonlinearity::kerr(*q)),
            NonlinearityConfig::Power { m, q } => Nonlinearity::power_real(*m, *q),
            NonlinearityConfig::Monomials { terms } => Ok(Nonlinearity::new(
                terms
                    .iter()
                    .map(|t| Susceptibility::constant(t.order, t.monomials.clone()))
                    .collect::<Result<_>>()?,
            )),
        }
    }
}

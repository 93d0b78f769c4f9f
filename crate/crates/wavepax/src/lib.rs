//! # wavepax
//!
//! Modal (Fourier-space) theory of particle-like wavepackets for dispersive
//! evolution equations of the form
//!
//! ```text
//! ∂τ U = −(i/ϱ) L(−i∇) U + F(U),
//! ```
//!
//! where `L(k)` is a Hermitian `2J × 2J` symbol and `F` a polynomial
//! convolution nonlinearity.
//!
//! The crate is organised in six modules:
//!
//! * [`dispersion`] — band functions, eigenprojectors, group velocities and
//!   band-crossing detection of the linear symbol.
//! * [`resonance`] — enumeration of resonance solutions, resonance selection,
//!   invariance classification and group-velocity-matching checks of
//!   nk-spectra.
//! * [`wavepacket`] — grids, modal fields, cutoffs, wavepacket construction,
//!   position detection and particle norms.
//! * [`evolution`] — convolution nonlinearities, fast/slow frames and the
//!   Picard solver of the integrated evolution equation.
//! * [`interaction`] — wavepacket interaction systems, their time-averaged,
//!   diagonal and reduced versions, coupling norms and homogeneity checks.
//! * [`harness`] — declarative experiments, sweeps, scaling fits and
//!   machine-readable outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dispersion;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod interaction;
pub mod resonance;
pub mod sign;
pub mod wavepacket;

pub use error::{Result, WavepaxError};
pub use num_complex::Complex64;
pub use sign::Sign;

//! Resonance analysis of nk-spectra: enumeration of resonance solutions,
//! output spectra, resonance selection and closure, invariance
//! classification and group-velocity matching.

mod classify;
mod enumerate;
mod exact;
mod gvm;
mod probe;
mod spectrum;

pub use classify::{classify, condition_row, Classification, ConditionClass, ResonanceReport};
pub use enumerate::{
    closure, enumerate_solutions, output_spectrum, resonance_select, resonant_outputs, select_from,
    Closure, Enumeration, ResonanceOptions, ResonanceSolution, SkippedOutput, SolutionClass,
};
pub use exact::{
    exact_band_value, exact_condition, exact_omega, exact_residual, exact_residual_is_zero,
};
pub use gvm::{gvm_check, pair_velocities, partial_gvm_check, GvmReport, PartialGvmReport};
pub use probe::{genericity_probe, ProbeResult};
pub use spectrum::{kappa, omega_combination, DecoratedIndex, NkPair, NkSpectrum};

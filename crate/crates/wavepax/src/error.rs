//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by wavepax operations.
#[derive(Debug, Error)]
pub enum WavepaxError {
    /// The eigen-gap of the symbol at `k` is below the band-crossing tolerance.
    #[error("band crossing at k = {k:?}: gap {gap:e} below tolerance {tol:e}")]
    BandCrossing { k: Vec<f64>, gap: f64, tol: f64 },

    /// A wavevector of the nk-spectrum lies on (or next to) the band-crossing set.
    #[error("spectrum pair {index} at k = {k:?} lies on the band-crossing set")]
    SpectrumOnSingularSet { index: usize, k: Vec<f64> },

    /// Exhaustive resonance enumeration would exceed the configured cap.
    #[error("enumeration cap exceeded: {0}")]
    EnumerationCapExceeded(String),

    /// A resonant output wavevector falls on the band-crossing set.
    #[error("resonant output wavevector {k:?} falls on the band-crossing set")]
    BandCrossingAtOutput { k: Vec<f64> },

    /// An iteration did not reach its fixed point.
    #[error("not converged after {iterations} iterations")]
    NotConverged { iterations: usize },

    /// A cutoff radius is not resolved by the grid spacing.
    #[error("cutoff radius {radius:e} not resolvable with grid spacing {dk:e}")]
    RadiusUnresolvable { radius: f64, dk: f64 },

    /// The envelope transform is too narrow for the grid.
    #[error("envelope under-resolved: k-width {width:e} < 4·Δk = {limit:e}")]
    EnvelopeUnderresolved { width: f64, limit: f64 },

    /// The sublevel set of the position detection function is empty.
    #[error("empty sublevel set: threshold {threshold:e} below minimum {minimum:e}")]
    EmptySublevelSet { threshold: f64, minimum: f64 },

    /// A packet lost its localization (sublevel set split or too wide).
    #[error("sublevel set split: {0}")]
    SublevelSetSplit(String),

    /// Fields defined on different grids were combined.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Picard distances grew for three consecutive iterations.
    #[error("Picard iteration diverged after {iterations} iterations (history {history:?})")]
    PicardDiverged {
        iterations: usize,
        history: Vec<f64>,
    },

    /// Picard iteration hit its iteration cap.
    #[error(
        "Picard iteration reached the cap of {iterations} iterations (last distance {distance:e})"
    )]
    PicardMaxIter { iterations: usize, distance: f64 },

    /// An experiment hypothesis (resonance class, group velocities, ...) is violated.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// A parameter has the wrong sign (e.g. c² ≤ 0 for the soliton).
    #[error("parameter sign error: {0}")]
    ParameterSignError(String),

    /// Malformed input (configuration, indices, shapes).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, WavepaxError>;

/// Shorthand for [`WavepaxError::InvalidInput`].
pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(WavepaxError::InvalidInput(msg.into()))
}

//! The linear symbol `L(k)`: band functions, eigenprojectors, symmetry
//! checks, group velocities and band-crossing detection.

mod crossings;
mod model;
mod presets;
mod table;

pub use crossings::{detect_band_crossings, neighborhood_bounds, BandNeighborhoodBounds};
pub use model::{
    projector_from, sym_opnorm, BandFn, Conjugation, DispersionModel, ModelKind, ScalarBand,
    SlotEigen, SymbolFn, Tolerances,
};
pub use presets::{ModelConfig, TabulatedSymbol};
pub use table::SymbolTable;

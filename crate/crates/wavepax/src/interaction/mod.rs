//! Wavepacket interaction systems: index sets of resonant interactions, the
//! interaction system with one unknown per pair and sign, its time-averaged,
//! diagonal and reduced versions, coupling norms and the homogeneity
//! identity of averaged nonlinearities.

mod diagnostics;
mod index_sets;
mod system;

pub use diagnostics::{
    averaged_with_coupling, coupling_norm, homogeneity_check, AveragedPolynomial, CouplingIntegral,
};
pub use index_sets::{
    build_index_sets, output_position, IndexSelection, InteractionIndexSets, NearResonance,
    OrderSets, OutputSets,
};
pub use system::{
    solve_averaged_system, solve_averaged_system_with, solve_interaction_system, ArgumentClip,
    AveragedMode, InteractionConfig, InteractionSetup, InteractionState, InteractionTrajectory,
    SystemKind,
};

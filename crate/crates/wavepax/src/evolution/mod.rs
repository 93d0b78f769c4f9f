//! Convolution nonlinearities, frame changes, interaction phases and the
//! Picard solver of the integrated evolution equation.

pub mod convolution;
pub mod frames;
pub mod phase;
pub(crate) mod picard;
pub mod solver;
pub mod susceptibility;

pub use convolution::{ConvolutionMode, Convolver, DIRECT_MAX_N};
pub use frames::{fast_slow_transform, modal_project};
pub use phase::interaction_phase;
pub use solver::{
    solve_integrated, solve_integrated_with, EvolutionProblem, IntegrandEvaluator, SolverConfig,
    Trajectory,
};
pub use susceptibility::{
    KernelFn, Monomial, MonomialTerm, Nonlinearity, NonlinearityConfig, Susceptibility,
};

//! Declarative experiments: run configurations, `(β, ϱ)` sweeps, log-log
//! fits, full-field simulations with snapshots, and machine-readable
//! results with provenance.

mod analysis;
mod config;
mod experiments;
mod fit;
mod result;
mod simulate;

pub use analysis::{analyze, resonance_analyze, AnalysisConfig, AnalysisOutput};
pub use config::{
    GridConfig, PacketConfig, PreparedRun, ResonanceConfig, RunConfig, SnapshotConfig,
    SolitonConfig, SweepConfig, Thresholds,
};
pub use experiments::{
    averaging_experiment, position_tracking_experiment, preservation_experiment,
    soliton_experiment, superposition_experiment, sweep, ExperimentKind,
};
pub use fit::{loglog_fit, Fit};
pub use result::{Check, ExperimentResult, Provenance, RunMetrics};
pub use simulate::{simulate, SimulationSummary};

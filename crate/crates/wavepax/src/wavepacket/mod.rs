//! Grids, modal fields, wavepacket construction and diagnostics.

pub mod cutoff;
pub mod envelope;
pub mod fft;
pub mod field;
pub mod grid;
pub mod norms;
pub mod packet;
pub mod position;
pub mod snapshot;

pub use cutoff::{build_cutoff, psi, smooth_step};
pub use envelope::{Envelope, EnvelopeFamily};
pub use fft::{GridTransform, NdFft};
pub use field::{l1_distance, l1_of, Frame, ModalField};
pub use grid::Grid;
pub use norms::{l1_norm, sup_time_norm};
pub use packet::{
    build_multi_wavepacket, build_wavepacket, build_wavepacket_parts, conjugate_reflect,
    regularity_defect, WavepacketSpec,
};
pub use position::{
    locate_position, particle_norm, position_detection, DetectionField, GradientMode,
    PositionEstimate, SearchBox,
};
pub use snapshot::{
    load_snapshot, read_snapshot, save_snapshot, write_csv_1d, write_snapshot, Precision,
    SnapshotHeader,
};

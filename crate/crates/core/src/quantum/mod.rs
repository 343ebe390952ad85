//! Quantum channel representations, conversions and metrics.

pub mod linalg;
pub mod metrics;
pub mod repr;

pub use linalg::{haar_random_unitary, CMatrix};
pub use metrics::{average_loss, average_transmittance, bures_distance_sq, process_distance, purity};
pub use repr::{
    apply_channel, apply_channel_chi, chi_to_kraus, choi_state, dilation_to_kraus, kraus_to_chi,
    kraus_to_dilation, ChiMatrix, DensityMatrix, DilationColumn, KrausSet,
};

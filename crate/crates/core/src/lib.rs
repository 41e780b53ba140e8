//! Health-status classification of turbofan degradation runs with random
//! convolutional kernel features.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`ingest`]: parse run-to-failure files, select and standardize
//!    sensors, split units into train and test, cut sliding windows.
//! 2. [`labeling`]: fuse sensors into a health index, fit a degradation
//!    curve per unit and turn its steepness into ordinal health classes.
//! 3. [`kernels`]: generate ROCKET or MiniROCKET kernel banks.
//! 4. [`transform`]: convolve windows with a bank and pool to features.
//! 5. [`classify`]: ridge, linear SVM and shrinkage LDA on the features.
//! 6. [`eval`]: metrics, the comparison experiments and kernel sweeps.

pub mod classify;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod kernels;
pub mod labeling;
pub mod matrix;
pub mod rng;
pub mod synth;
pub mod transform;

pub use classify::{ClassifierKind, TrainedClassifier};
pub use error::{Error, Result};
pub use eval::{compute_metrics, Metrics};
pub use ingest::{DatasetId, IngestedDataset, RawTrajectory, SensorSelection, Split, TimeSeriesWindow, WindowId};
pub use kernels::{KernelBank, KernelSpec, Variant};
pub use labeling::{HsLabeling, LabelConfig, LabelSet};
pub use matrix::Matrix;
pub use transform::FeatureMatrix;

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

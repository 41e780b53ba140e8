//! Shared fixtures for the benchmarks: windows cut from a seeded surrogate
//! FD001 training set.

use hsrocket::ingest::{DatasetId, IngestedDataset, SensorSelection, Split};
use hsrocket::labeling::{build_labels, LabelConfig};
use hsrocket::TimeSeriesWindow;

pub const WINDOW_LEN: usize = 30;

/// Training and test windows with labels, taken every `stride` cycles.
pub fn fd001_windows(stride: usize) -> (Vec<TimeSeriesWindow>, Vec<TimeSeriesWindow>) {
    let trajs = hsrocket::synth::generate(DatasetId::FD001, 2024);
    let ds = IngestedDataset::build(
        DatasetId::FD001,
        &trajs,
        &SensorSelection::default(),
        WINDOW_LEN,
        stride,
        0.2,
        7,
    )
    .expect("surrogate data ingests");
    let labels = build_labels(&ds, &LabelConfig::default()).expect("surrogate data labels");
    (
        ds.windows(Split::Train, Some(&labels.labels)).unwrap(),
        ds.windows(Split::Test, Some(&labels.labels)).unwrap(),
    )
}

pub fn labels_of(windows: &[TimeSeriesWindow]) -> Vec<usize> {
    windows.iter().map(|w| w.label.expect("labelled window")).collect()
}

//! Metrics, the comparison experiments and kernel-count sweeps.

mod experiment;
mod metrics;
mod sweep;

pub use experiment::{
    run_experiment, DatasetInput, ExperimentConfig, ExperimentOutput, ExperimentReport, InputRef,
    Protocol, RunRecord, RunTiming, SummaryRow, REPORT_FORMAT_VERSION,
};
pub use metrics::{compute_metrics, Metrics};
pub use sweep::{kernel_sweep, sweep_csv, SweepConfig, SweepRow};

use std::time::Instant;

use crate::classify::{fit_classifier, ClassifierKind, ClassifierParams};
use crate::error::{Error, Result};
use crate::ingest::TimeSeriesWindow;
use crate::kernels::{generate_minirocket, generate_rocket, ChannelMode, KernelBank, Variant};
use crate::transform::transform_all;

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub(crate) fn window_labels(windows: &[TimeSeriesWindow]) -> Result<Vec<usize>> {
    windows
        .iter()
        .map(|w| {
            w.label.ok_or_else(|| {
                Error::Integrity(format!(
                    "window unit {} cycle {} has no label",
                    w.id.unit_id, w.id.end_cycle
                ))
            })
        })
        .collect()
}

/// Bank sizing shared by experiments and sweeps: ROCKET uses `kernels`
/// kernels, MiniROCKET targets `minirocket_features` PPV features.
pub(crate) fn build_bank(
    variant: Variant,
    kernels: usize,
    minirocket_features: usize,
    train: &[TimeSeriesWindow],
    seed: u64,
    mode: ChannelMode,
) -> Result<KernelBank> {
    let first = train
        .first()
        .ok_or_else(|| Error::Degenerate("no training windows".into()))?;
    let (m, len) = (first.values.rows(), first.values.cols());
    match variant {
        Variant::Rocket => generate_rocket(kernels, m, len, seed, mode),
        Variant::Minirocket => generate_minirocket(minirocket_features, m, len, seed, mode, train),
    }
}

pub(crate) struct FitOutcome {
    pub classifier: ClassifierKind,
    pub metrics: Metrics,
    pub converged: bool,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

pub(crate) struct PassOutcome {
    pub bank_ref: String,
    pub n_features: usize,
    pub transform_seconds: f64,
    pub fits: Vec<FitOutcome>,
}

/// One bank, one transform of both splits, then every requested classifier.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_pass(
    train: &[TimeSeriesWindow],
    test: &[TimeSeriesWindow],
    classes: usize,
    variant: Variant,
    kernels: usize,
    minirocket_features: usize,
    seed: u64,
    mode: ChannelMode,
    classifiers: &[ClassifierKind],
    params: &ClassifierParams,
    workers: usize,
) -> Result<PassOutcome> {
    let y_train = window_labels(train)?;
    let y_test = window_labels(test)?;
    if test.is_empty() {
        return Err(Error::Degenerate("no test windows".into()));
    }

    let start = Instant::now();
    let bank = build_bank(variant, kernels, minirocket_features, train, seed, mode)?;
    let x_train = transform_all(train, &bank, workers)?;
    let x_test = transform_all(test, &bank, workers)?;
    let transform_seconds = start.elapsed().as_secs_f64();

    let mut fits = Vec::with_capacity(classifiers.len());
    for &kind in classifiers {
        let start = Instant::now();
        let model = fit_classifier(kind, &x_train.values, &y_train, params)?;
        let fit_seconds = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let predicted = model.predict(&x_test.values)?;
        let predict_seconds = start.elapsed().as_secs_f64();
        fits.push(FitOutcome {
            classifier: kind,
            metrics: compute_metrics(&y_test, &predicted, classes)?,
            converged: model.converged,
            fit_seconds,
            predict_seconds,
        });
    }
    Ok(PassOutcome {
        bank_ref: bank.manifest.hash(),
        n_features: x_train.n_features(),
        transform_seconds,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{mean_std, run_pass};
use crate::classify::{ClassifierKind, ClassifierParams};
use crate::error::{Error, Result};
use crate::ingest::Split;
use crate::kernels::{ChannelMode, Variant};
use crate::rng::derive_seed;

use super::DatasetInput;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub counts: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub variant: Variant,
    pub classifier: ClassifierKind,
    pub channel_mode: ChannelMode,
    pub params: ClassifierParams,
    #[serde(skip)]
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            counts: vec![100, 500, 1000, 2000, 5000, 10000],
            repeats: 5,
            seed: 0,
            variant: Variant::Rocket,
            classifier: ClassifierKind::Ridge,
            channel_mode: ChannelMode::default(),
            params: ClassifierParams::default(),
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kernels: usize,
    pub n_features: usize,
    pub repeats: usize,
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_macro_f1: f64,
    /// Transform plus fit plus predict.
    pub mean_seconds: f64,
    pub std_seconds: f64,
}

/// Accuracy and wall-clock against kernel count. MiniROCKET points target
/// two PPV features per requested kernel.
pub fn kernel_sweep(input: &DatasetInput<'_>, config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.counts.is_empty() || config.counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("sweep counts must be non-empty and strictly ascending".into()));
    }
    if config.counts[0] == 0 || config.repeats == 0 {
        return Err(Error::Config("sweep counts and repeats must be positive".into()));
    }
    let classes = input.labels.summary.config.classes;
    let train = input.dataset.windows(Split::Train, Some(&input.labels.labels))?;
    let test = input.dataset.windows(Split::Test, Some(&input.labels.labels))?;

    let mut rows = Vec::with_capacity(config.counts.len());
    for &count in &config.counts {
        let mut acc = Vec::with_capacity(config.repeats);
        let mut f1 = Vec::with_capacity(config.repeats);
        let mut secs = Vec::with_capacity(config.repeats);
        let mut n_features = 0;
        for repeat in 0..config.repeats {
            let seed = derive_seed(config.seed, "sweep", repeat as u64);
            let mut params = config.params.clone();
            params.svm.seed = derive_seed(seed, "svm", 0);
            let pass = run_pass(
                &train,
                &test,
                classes,
                config.variant,
                count,
                2 * count,
                seed,
                config.channel_mode,
                &[config.classifier],
                &params,
                config.workers,
            )?;
            n_features = pass.n_features;
            let fit = &pass.fits[0];
            acc.push(fit.metrics.accuracy);
            f1.push(fit.metrics.macro_f1);
            secs.push(pass.transform_seconds + fit.fit_seconds + fit.predict_seconds);
        }
        let (mean_accuracy, std_accuracy) = mean_std(&acc);
        let (mean_seconds, std_seconds) = mean_std(&secs);
        log::info!("sweep {count} kernels: acc {mean_accuracy:.4} in {mean_seconds:.2}s");
        rows.push(SweepRow {
            kernels: count,
            n_features,
            repeats: config.repeats,
            accuracies: acc,
            mean_accuracy,
            std_accuracy,
            mean_macro_f1: mean_std(&f1).0,
            mean_seconds,
            std_seconds,
        });
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("kernels,n_features,repeats,mean_accuracy,std_accuracy,mean_macro_f1,mean_seconds,std_seconds\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.kernels, r.n_features, r.repeats, r.mean_accuracy, r.std_accuracy, r.mean_macro_f1, r.mean_seconds, r.std_seconds
        );
    }
    out
}

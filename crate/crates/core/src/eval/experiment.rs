use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{mean_std, run_pass, Metrics};
use crate::classify::{ClassifierKind, ClassifierParams};
use crate::error::{Error, Result};
use crate::ingest::{DatasetId, IngestedDataset, Split};
use crate::kernels::{ChannelMode, Variant};
use crate::labeling::LabelSet;
use crate::rng::derive_seed;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Both variants at 500 kernels on FD001.
    Exp1,
    /// Both variants at 5000 kernels on each dataset.
    Exp2,
    /// Ridge, SVM and LDA on 5000 MiniROCKET PPV features.
    Exp3,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Exp1 => "exp1",
            Protocol::Exp2 => "exp2",
            Protocol::Exp3 => "exp3",
        }
    }

    pub fn default_datasets(self) -> Vec<DatasetId> {
        match self {
            Protocol::Exp1 => vec![DatasetId::FD001],
            _ => DatasetId::ALL.to_vec(),
        }
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp1" => Ok(Self::Exp1),
            "exp2" => Ok(Self::Exp2),
            "exp3" => Ok(Self::Exp3),
            _ => Err(Error::Config(format!("unknown protocol `{s}` (expected exp1|exp2|exp3)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub kernels: usize,
    pub minirocket_features: usize,
    pub variants: Vec<Variant>,
    pub classifiers: Vec<ClassifierKind>,
    pub repeats: usize,
    pub seed: u64,
    pub channel_mode: ChannelMode,
    pub params: ClassifierParams,
    /// Thread count for the transform; does not affect results.
    #[serde(skip)]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn for_protocol(protocol: Protocol) -> Self {
        let (kernels, variants, classifiers) = match protocol {
            Protocol::Exp1 => (500, vec![Variant::Rocket, Variant::Minirocket], vec![ClassifierKind::Ridge]),
            Protocol::Exp2 => (5000, vec![Variant::Rocket, Variant::Minirocket], vec![ClassifierKind::Ridge]),
            Protocol::Exp3 => (
                5000,
                vec![Variant::Minirocket],
                vec![ClassifierKind::Ridge, ClassifierKind::Svm, ClassifierKind::Lda],
            ),
        };
        let mut cfg = Self {
            protocol,
            kernels,
            minirocket_features: 0,
            variants,
            classifiers,
            repeats: 5,
            seed: 0,
            channel_mode: ChannelMode::default(),
            params: ClassifierParams::default(),
            workers: 0,
        };
        cfg.minirocket_features = cfg.default_minirocket_features();
        cfg
    }

    /// Exp3 asks for one PPV feature per kernel; the other protocols match
    /// ROCKET's two features per kernel.
    pub fn default_minirocket_features(&self) -> usize {
        match self.protocol {
            Protocol::Exp3 => self.kernels,
            _ => 2 * self.kernels,
        }
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        crate::sha256_hex(&json)
    }

    fn validate(&self) -> Result<()> {
        if self.kernels == 0 || self.repeats == 0 {
            return Err(Error::Config("kernels and repeats must be positive".into()));
        }
        if self.variants.is_empty() || self.classifiers.is_empty() {
            return Err(Error::Config("need at least one variant and one classifier".into()));
        }
        Ok(())
    }
}

/// Prepared inputs for one dataset.
pub struct DatasetInput<'a> {
    pub dataset: &'a IngestedDataset,
    pub labels: &'a LabelSet,
}

/// Hashes identifying the cached stages an experiment consumed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputRef {
    pub dataset: DatasetId,
    pub ingest_sha256: String,
    pub labels_sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: DatasetId,
    pub variant: Variant,
    pub classifier: ClassifierKind,
    pub repeat: usize,
    pub seed: u64,
    pub n_features: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub bank_ref: String,
    pub converged: bool,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: DatasetId,
    pub variant: Variant,
    pub classifier: ClassifierKind,
    pub runs: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_macro_f1: f64,
    pub std_macro_f1: f64,
}

/// Wall-clock seconds per phase for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub dataset: DatasetId,
    pub variant: Variant,
    pub classifier: ClassifierKind,
    pub repeat: usize,
    pub transform_seconds: f64,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

/// Reproducible part of an experiment's output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub inputs: Vec<InputRef>,
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentReport {
    /// One flat row per run.
    pub fn runs_csv(&self) -> String {
        let mut out = String::from(
            "dataset,variant,classifier,repeat,seed,n_features,n_train,n_test,accuracy,macro_f1,converged\n",
        );
        for r in &self.runs {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.dataset,
                r.variant.as_str(),
                r.classifier.as_str(),
                r.repeat,
                r.seed,
                r.n_features,
                r.n_train,
                r.n_test,
                r.metrics.accuracy,
                r.metrics.macro_f1,
                r.converged
            ));
        }
        out
    }
}

pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub timings: Vec<RunTiming>,
}

fn sha256_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(crate::sha256_hex(&serde_json::to_vec(value)?))
}

/// Runs `config.repeats` seeded repetitions over every dataset, variant
/// and classifier. Repeat `r` derives its seeds from the master seed; the
/// unit split and labels come from the inputs and stay fixed.
pub fn run_experiment(inputs: &[DatasetInput<'_>], config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    if inputs.is_empty() {
        return Err(Error::Config("experiment needs at least one dataset".into()));
    }
    let mut runs = Vec::new();
    let mut timings = Vec::new();
    let mut refs = Vec::new();

    for input in inputs {
        let dataset = input.dataset.manifest.dataset;
        refs.push(InputRef {
            dataset,
            ingest_sha256: sha256_json(&input.dataset.manifest)?,
            labels_sha256: sha256_json(&input.labels.summary)?,
        });
        let classes = input.labels.summary.config.classes;
        let train = input.dataset.windows(Split::Train, Some(&input.labels.labels))?;
        let test = input.dataset.windows(Split::Test, Some(&input.labels.labels))?;
        log::info!("{dataset}: {} train / {} test windows", train.len(), test.len());

        for repeat in 0..config.repeats {
            let repeat_seed = derive_seed(config.seed, "repeat", repeat as u64);
            for &variant in &config.variants {
                let seed = derive_seed(repeat_seed, &format!("{dataset}/{}", variant.as_str()), 0);
                let mut params = config.params.clone();
                params.svm.seed = derive_seed(seed, "svm", 0);
                let pass = run_pass(
                    &train,
                    &test,
                    classes,
                    variant,
                    config.kernels,
                    config.minirocket_features,
                    seed,
                    config.channel_mode,
                    &config.classifiers,
                    &params,
                    config.workers,
                )?;
                for fit in pass.fits {
                    log::info!(
                        "{dataset} {} {} repeat {repeat}: acc {:.4} f1 {:.4}",
                        variant.as_str(),
                        fit.classifier.as_str(),
                        fit.metrics.accuracy,
                        fit.metrics.macro_f1
                    );
                    timings.push(RunTiming {
                        dataset,
                        variant,
                        classifier: fit.classifier,
                        repeat,
                        transform_seconds: pass.transform_seconds,
                        fit_seconds: fit.fit_seconds,
                        predict_seconds: fit.predict_seconds,
                    });
                    runs.push(RunRecord {
                        dataset,
                        variant,
                        classifier: fit.classifier,
                        repeat,
                        seed,
                        n_features: pass.n_features,
                        n_train: train.len(),
                        n_test: test.len(),
                        bank_ref: pass.bank_ref.clone(),
                        converged: fit.converged,
                        metrics: fit.metrics,
                    });
                }
            }
        }
    }

    let summary = summarize(&runs);
    Ok(ExperimentOutput {
        report: ExperimentReport {
            format_version: REPORT_FORMAT_VERSION,
            config: config.clone(),
            config_sha256: config.hash(),
            inputs: refs,
            runs,
            summary,
        },
        timings,
    })
}

fn summarize(runs: &[RunRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(DatasetId, Variant, ClassifierKind)> = Vec::new();
    for r in runs {
        let key = (r.dataset, r.variant, r.classifier);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(dataset, variant, classifier)| {
            let group: Vec<&RunRecord> = runs
                .iter()
                .filter(|r| r.dataset == dataset && r.variant == variant && r.classifier == classifier)
                .collect();
            let acc: Vec<f64> = group.iter().map(|r| r.metrics.accuracy).collect();
            let f1: Vec<f64> = group.iter().map(|r| r.metrics.macro_f1).collect();
            let (mean_accuracy, std_accuracy) = mean_std(&acc);
            let (mean_macro_f1, std_macro_f1) = mean_std(&f1);
            SummaryRow {
                dataset,
                variant,
                classifier,
                runs: group.len(),
                mean_accuracy,
                std_accuracy,
                mean_macro_f1,
                std_macro_f1,
            }
        })
        .collect()
}

//! `hsrocket`: ingest, label, transform, train and evaluate health-status
//! classifiers on CMAPSS-style run-to-failure data.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hsrocket::classify::{fit_classifier, ClassifierKind, ClassifierParams, SvmParams, TrainedClassifier};
use hsrocket::eval::{
    compute_metrics, kernel_sweep, run_experiment, sweep_csv, DatasetInput, ExperimentConfig, Protocol,
    SweepConfig,
};
use hsrocket::ingest::{parse_cmapss, DatasetId, IngestedDataset, SensorSelection, Split, DEFAULT_SENSORS};
use hsrocket::kernels::{generate_minirocket, generate_rocket, BankManifest, ChannelMode, KernelBank, Variant};
use hsrocket::labeling::{build_labels, LabelConfig, LabelSet, LABELS_FILE, SUMMARY_FILE};
use hsrocket::transform::{transform_all, FeatureMatrix};
use hsrocket::{sha256_hex, Error};

use config::{manifest_beside, Resolver, RunManifest};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (formats: cache 1, labels 1, bank 1, features 1, model 1, report 1)"
);

#[derive(Parser)]
#[command(name = "hsrocket", version = VERSION, about, arg_required_else_help = true)]
struct Cli {
    /// JSON file of default settings, keyed by long flag name with `_`
    /// for `-`. Flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log verbosity: -v info, -vv debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a CMAPSS training file, split units, standardize and cache.
    Ingest(IngestArgs),
    /// Build per-cycle health-status labels for an ingested cache.
    Label(LabelArgs),
    /// Generate a kernel bank and write its manifest.
    Kernels(KernelArgs),
    /// Apply a kernel bank to every window of a cache.
    Transform(TransformArgs),
    /// Fit a classifier on the training rows of a feature file.
    Train(TrainArgs),
    /// Score a model on the test rows of a feature file.
    Evaluate(EvaluateArgs),
    /// Run a comparison protocol over cached datasets.
    Experiment(ExperimentArgs),
    /// Accuracy and run time against kernel count.
    Sweep(SweepArgs),
    /// Write seeded surrogate CMAPSS training files.
    Synth(SynthArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    dataset: Option<DatasetId>,
    /// Directory holding train_FDxxx.txt (falls back to $CMAPSS_DIR).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Comma-separated sensor names, e.g. s2,s3,s4.
    #[arg(long, value_delimiter = ',')]
    sensors: Option<Vec<String>>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    sg_window: Option<usize>,
    #[arg(long)]
    sg_order: Option<usize>,
    /// Defaults to the cache directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    variant: Option<Variant>,
    /// ROCKET kernel count, or MiniROCKET target feature count.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `subset` (random channel subsets) or `all`.
    #[arg(long)]
    channel_mode: Option<ChannelMode>,
    /// Also write the full kernel specs as JSON.
    #[arg(long)]
    specs: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    bank: Option<PathBuf>,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct ModelFlags {
    /// Ridge alpha grid, comma-separated.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long)]
    svm_c: Option<f64>,
    #[arg(long)]
    svm_tol: Option<f64>,
    #[arg(long)]
    svm_max_iter: Option<usize>,
    /// Fixed LDA shrinkage in [0, 1]; omitted means Ledoit-Wolf.
    #[arg(long)]
    lda_shrinkage: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    model: Option<ClassifierKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    flags: ModelFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    split: Option<Split>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    protocol: Option<Protocol>,
    #[arg(long, value_delimiter = ',')]
    datasets: Option<Vec<DatasetId>>,
    /// Root holding one cache directory per dataset (`<root>/FD001`, ...).
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    kernels: Option<usize>,
    #[arg(long)]
    minirocket_features: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    variant: Option<Vec<Variant>>,
    #[arg(long, value_delimiter = ',')]
    classifier: Option<Vec<ClassifierKind>>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    channel_mode: Option<ChannelMode>,
    #[command(flatten)]
    flags: ModelFlags,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    dataset: Option<DatasetId>,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<usize>>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    classifier: Option<ClassifierKind>,
    #[arg(long)]
    channel_mode: Option<ChannelMode>,
    #[command(flatten)]
    flags: ModelFlags,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_delimiter = ',')]
    datasets: Option<Vec<DatasetId>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = err
                .chain()
                .find_map(|e| e.downcast_ref::<Error>())
                .map_or("other", Error::kind);
            let msg = format!("{err:#}").replace('\n', " ");
            eprintln!("error: kind={kind} msg={msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut res = Resolver::new(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(a) => ingest(a, &mut res).map(|m| m.write_to(res, "ingest")),
        Command::Label(a) => label(a, &mut res).map(|m| m.write_to(res, "label")),
        Command::Kernels(a) => kernels(a, &mut res).map(|m| m.write_to(res, "kernels")),
        Command::Transform(a) => transform(a, &mut res).map(|m| m.write_to(res, "transform")),
        Command::Train(a) => train(a, &mut res).map(|m| m.write_to(res, "train")),
        Command::Evaluate(a) => evaluate(a, &mut res).map(|m| m.write_to(res, "evaluate")),
        Command::Experiment(a) => experiment(a, &mut res).map(|m| m.write_to(res, "experiment")),
        Command::Sweep(a) => sweep(a, &mut res).map(|m| m.write_to(res, "sweep")),
        Command::Synth(a) => synth(a, &mut res).map(|m| m.write_to(res, "synth")),
    }?
}

/// Where a command's manifest goes and which files it read.
struct Outcome {
    manifest_path: PathBuf,
    inputs: Vec<PathBuf>,
}

impl Outcome {
    fn write_to(self, res: Resolver, command: &str) -> anyhow::Result<()> {
        let mut manifest: RunManifest = res.into_manifest(command);
        for path in &self.inputs {
            manifest.add_input(path)?;
        }
        manifest.write(&self.manifest_path)
    }
}

fn model_params(flags: ModelFlags, seed: u64, res: &mut Resolver) -> anyhow::Result<ClassifierParams> {
    let defaults = ClassifierParams::default();
    let svm = SvmParams {
        c: res.get("svm_c", flags.svm_c, defaults.svm.c)?,
        tol: res.get("svm_tol", flags.svm_tol, defaults.svm.tol)?,
        max_iter: res.get("svm_max_iter", flags.svm_max_iter, defaults.svm.max_iter)?,
        seed,
    };
    Ok(ClassifierParams {
        alphas: res.get("alphas", flags.alphas, defaults.alphas)?,
        svm,
        lda_shrinkage: res.get("lda_shrinkage", flags.lda_shrinkage.map(Some), None)?,
    })
}

fn cache_files(dir: &Path, with_labels: bool) -> Vec<PathBuf> {
    let mut files = vec![dir.join(hsrocket::ingest::MANIFEST_FILE), dir.join(hsrocket::ingest::SERIES_FILE)];
    if with_labels {
        files.push(dir.join(SUMMARY_FILE));
        files.push(dir.join(LABELS_FILE));
    }
    files
}

fn ingest(a: IngestArgs, res: &mut Resolver) -> anyhow::Result<Outcome> {
    let dataset: DatasetId = res.require("dataset", a.dataset)?;
    let env_dir = std::env::var_os("CMAPSS_DIR").map(PathBuf::from);
    let data_dir: PathBuf = match a.data_dir.or(env_dir) {
        Some(d) => res.get("data_dir", Some(d), PathBuf::new())?,
        None => res.require("data_dir", None)?,
    };
    let default_sensors: Vec<String> = DEFAULT_SENSORS.iter().map(|s| s.to_string()).collect();
    let sensor_names: Vec<String> = res.get("sensors", a.sensors, default_sensors)?;
    let window = res.get("window", a.window, 30)?;
    let stride = res.get("stride", a.stride, 1)?;
    let test_fraction = res.get("test_fraction", a.test_fraction, 0.2)?;
    let seed = res.get("seed", a.seed, 0)?;
    let out: PathBuf = res.require("out", a.out)?;

    let path = data_dir.join(dataset.train_file_name());
    if !path.exists() {
        return Err(Error::Config(format!(
            "{} not found (set --data-dir or CMAPSS_DIR; `hsrocket synth` writes surrogate files)",
            path.display()
        ))
        .into());
    }
    let sensors = SensorSelection::new(&sensor_names)?;
    let trajs = parse_cmapss(&path, dataset)?;
    let mut ds = IngestedDataset::build(dataset, &trajs, &sensors, window, stride, test_fraction, seed)?;
    ds.manifest.source_sha256 = Some(sha256_hex(&std::fs::read(&path)?));
    ds.save(&out)?;
    println!(
        "ingested {dataset}: {} units ({} train / {} test) into {}",
        ds.units.len(),
        ds.manifest.split.train.len(),
        ds.manifest.split.test.len(),
        out.display()
    );
    Ok(Outcome { manifest_path: out.join("ingest.manifest.json"), inputs: vec![path] })
}

fn label(a: LabelArgs, res: &mut Resolver) -> anyhow::Result<Outcome> {
    let cache: PathBuf = res.require("cache", a.cache)?;
    let defaults = LabelConfig::default();
    let cfg = LabelConfig {
        classes: res.get("classes", a.classes, defaults.classes)?,
        sg_window: res.get("sg_window", a.sg_window, defaults.sg_window)?,
        sg_order: res.get("sg_order", a.sg_order, defaults.sg_order)?,
    };
    let out = res.get("out", a.out, cache.clone())?;
    let ds = IngestedDataset::load(&cache)?;
    let labels = build_labels(&ds, &cfg)?;
    labels.save(&out)?;
    println!(
        "labelled {} units into {} classes; training class counts {:?}",
        labels.labels.len(),
        cfg.classes,
        labels.summary.train_class_counts
    );
    Ok(Outcome { manifest_path: out.join("label.manifest.json"), inputs: cache_files(&cache, false) })
}

fn kernels(a: KernelArgs, res: &mut Resolver) -> anyhow::Result<Outcome> {
    let cache: PathBuf = res.require("cache", a.cache)?;
    let variant = res.get("variant", a.variant, Variant::Rocket)?;
    let default_count = match variant {
        Variant::Rocket => 10_000,
        Variant::Minirocket => 10_000,
    };
    let count = res.get("count", a.count, default_count)?;
    let seed = res.get("seed", a.seed, 0)?;
    let mode = res.get("channel_mode", a.channel_mode, ChannelMode::default())?;
    let out: PathBuf = res.require("out", a.out)?;

    let ds = IngestedDataset::load(&cache)?;
    let (m, len) = (ds.channels(), ds.manifest.window_len);
    let bank = match variant {
        Variant::Rocket => generate_rocket(count, m, len, seed, mode)?,
        Variant::Minirocket => {
            let train = ds.windows(Split::Train, None)?;
            generate_minirocket(count, m, len, seed, mode, &train)?
        }
    };
    std::fs::write(&out, serde_json::to_string_pretty(&bank.manifest)? + "\n")?;
    if let Some(specs) = a.specs {
        std::fs::write(&specs, bank.specs_json()?)?;
    }
    println!(
        "{} bank: {} kernels, {} features, hash {}",
        variant.as_str(),
        bank.specs.len(),
        bank.feature_count(),
        bank.manifest.hash()
    );
    Ok(Outcome { manifest_path: manifest_beside(&out), inputs: cache_files(&cache, false) })
}

fn transform(a: TransformArgs, res: &mut Resolver) -> anyhow::Result<Outcome> {
    let bank_path: PathBuf = res.require("bank", a.bank)?;
    let cache: PathBuf = res.require("cache", a.cache)?;
    let out: PathBuf = res.require("out", a.out)?;
    let workers = a.workers.unwrap_or(0);

    let manifest: BankManifest = serde_json::from_str(
        &std::fs::read_to_string(&bank_path).with_context(|| format!("reading bank {}", bank_path.display()))?,
    )
    .map_err(Error::from)?;
    let ds = IngestedDataset::load(&cache)?;
    let labels = match LabelSet::load(&cache) {
        Ok(l) => Some(l),
        Err(Error::MissingCache { .. }) => {
            log::warn!("no labels in {}; features will be unlabelled", cache.display());
            None
        }
        Err(e) => return Err(e.into()),
    };
    let label_map = labels.as_ref().map(|l| &l.labels);
    let train = ds.windows(Split::Train, label_map)?;
    let test = ds.windows(Split::Test, label_map)?;
    let bank = KernelBank::from_manifest(&manifest, &train)?;

    let mut features = transform_all(&train, &bank, workers)?;
    features.splits = Some(vec![Split::Train; train.len()]);
    let mut test_features = transform_all(&test, &bank, workers)?;
    test_features.splits = Some(vec![Split::Test; test.len()]);
    let features = features.concat(test_features)?;
    features.save(&out)?;
    println!(
        "{} x {} features written to {}",
        features.n_samples(),
        features.n_features(),
        out.display()
    );
    let mut inputs = vec![bank_path];
    inputs.extend(cache_files(&cache, labels.is_some()));
    Ok(Outcome { manifest_path: manifest_beside(&out), inputs })
}

fn load_features(path: &Path) -> anyhow::Result<FeatureMatrix> {
    Ok(FeatureMatrix::load(path)?)
}

fn train(a: TrainArgs, res: &mut Resolver) -> anyhow::Result<Outcome> {
    let features_path: PathBuf = res.require("features", a.features)?;
    let kind = res.get("model", a.model, ClassifierKind::Ridge)?;
    let seed = res.get("seed", a.seed, 0)?;
    let params = model_params(a.flags, seed, res)?;
    let out: PathBuf = res.require("out", a.out)?;

    let features = load_features(&features_path)?;
    let train = if features.splits.is_some() { features.subset(Split::Train)? } else { features };
    let labels = train
        .labels
        .as_ref()
        .ok_or_else(|| Error::MissingCache { path: features_path.clone(), step: "label" })?;
    let mut model = fit_classifier(kind, &train.values, labels, &params)?;
    model.training_ref = Some(train.bank_ref.clone());
    model.save(&out)?;
    println!(
        "{} trained on {} x {} (converged: {})",
        kind.as_str(),
        train.n_samples(),
        train.n_features(),
        model.converged
    );
    Ok(Outcome { manifest_path: manifest_beside(&out), inputs: vec![features_path] })
}

fn evaluate(a: EvaluateArgs, res: &mut Resolver) -> anyhow::Result<Outcome> {
    let model_path: PathBuf = res.require("model", a.model)?;
    let features_path: PathBuf = res.require("features", a.features)?;
    let split = res.get("split", a.split, Split::Test)?;
    let out: PathBuf = res.require("out", a.out)?;

    let model = TrainedClassifier::load(&model_path)?;
    let features = load_features(&features_path)?;
    if model.training_ref.as_deref().is_some_and(|r| r != features.bank_ref) {
        return Err(Error::Integrity("model was trained on features from a different kernel bank".into()).into());
    }
    let rows = if features.splits.is_some() { features.subset(split)? } else { features };
    let truth = rows
        .labels
        .as_ref()
        .ok_or_else(|| Error::MissingCache { path: features_path.clone(), step: "label" })?;
    let predicted = model.predict(&rows.values)?;
    let classes = model.classes.iter().max().map_or(0, |m| m + 1).max(truth.iter().max().map_or(0, |m| m + 1));
    let metrics = compute_metrics(truth, &predicted, classes)?;
    std::fs::write(&out, serde_json::to_string_pretty(&metrics)? + "\n")?;
    println!("accuracy {:.4}  macro-F1 {:.4}  ({} samples)", metrics.accuracy, metrics.macro_f1, truth.len());
    Ok(Outcome { manifest_path: manifest_beside(&out), inputs: vec![model_path, features_path] })
}

fn load_inputs(root: &Path, datasets: &[DatasetId]) -> anyhow::Result<Vec<(IngestedDataset, LabelSet, PathBuf)>> {
    datasets
        .iter()
        .map(|d| {
            let dir = root.join(d.as_str());
            let ds = IngestedDataset::load(&dir)?;
            if ds.manifest.dataset != *d {
                return Err(Error::Integrity(format!("{} holds {}, not {d}", dir.display(), ds.manifest.dataset)).into());
            }
            let labels = LabelSet::load(&dir)?;
            Ok((ds, labels, dir))
        })
        .collect()
}

fn experiment(a: ExperimentArgs, res: &mut Resolver) -> anyhow::Result<Outcome> {
    let protocol = res.get("protocol", a.protocol, Protocol::Exp2)?;
    let mut cfg = ExperimentConfig::for_protocol(protocol);
    let datasets = res.get("datasets", a.datasets, protocol.default_datasets())?;
    let cache: PathBuf = res.require("cache", a.cache)?;
    cfg.kernels = res.get("kernels", a.kernels, cfg.kernels)?;
    cfg.minirocket_features = res.get("minirocket_features", a.minirocket_features, cfg.default_minirocket_features())?;
    cfg.variants = res.get("variant", a.variant, cfg.variants.clone())?;
    cfg.classifiers = res.get("classifier", a.classifier, cfg.classifiers.clone())?;
    cfg.repeats = res.get("repeats", a.repeats, cfg.repeats)?;
    cfg.seed = res.get("seed", a.seed, 0)?;
    cfg.channel_mode = res.get("channel_mode", a.channel_mode, cfg.channel_mode)?;
    cfg.params = model_params(a.flags, 0, res)?;
    cfg.workers = a.workers.unwrap_or(0);
    let out: PathBuf = res.require("out", a.out)?;

    let loaded = load_inputs(&cache, &datasets)?;
    let inputs: Vec<DatasetInput<'_>> =
        loaded.iter().map(|(dataset, labels, _)| DatasetInput { dataset, labels }).collect();
    let output = run_experiment(&inputs, &cfg)?;

    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&output.report)? + "\n")?;
    std::fs::write(out.join("runs.csv"), output.report.runs_csv())?;
    std::fs::write(out.join("timings.json"), serde_json::to_string_pretty(&output.timings)? + "\n")?;
    for row in &output.report.summary {
        println!(
            "{} {:<10} {:<5} acc {:.4} ± {:.4}  macro-F1 {:.4} ± {:.4}",
            row.dataset,
            row.variant.as_str(),
            row.classifier.as_str(),
            row.mean_accuracy,
            row.std_accuracy,
            row.mean_macro_f1,
            row.std_macro_f1
        );
    }
    let inputs = loaded.iter().flat_map(|(_, _, dir)| cache_files(dir, true)).collect();
    Ok(Outcome { manifest_path: out.join("manifest.json"), inputs })
}

fn sweep(a: SweepArgs, res: &mut Resolver) -> anyhow::Result<Outcome> {
    let dataset = res.get("dataset", a.dataset, DatasetId::FD001)?;
    let cache: PathBuf = res.require("cache", a.cache)?;
    let mut cfg = SweepConfig::default();
    cfg.counts = res.get("counts", a.counts, cfg.counts.clone())?;
    cfg.repeats = res.get("repeats", a.repeats, cfg.repeats)?;
    cfg.seed = res.get("seed", a.seed, 0)?;
    cfg.variant = res.get("variant", a.variant, cfg.variant)?;
    cfg.classifier = res.get("classifier", a.classifier, cfg.classifier)?;
    cfg.channel_mode = res.get("channel_mode", a.channel_mode, cfg.channel_mode)?;
    cfg.params = model_params(a.flags, 0, res)?;
    cfg.workers = a.workers.unwrap_or(0);
    let out: PathBuf = res.require("out", a.out)?;

    let loaded = load_inputs(&cache, &[dataset])?;
    let (ds, labels, dir) = &loaded[0];
    let rows = kernel_sweep(&DatasetInput { dataset: ds, labels }, &cfg)?;
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("sweep.csv"), sweep_csv(&rows))?;
    std::fs::write(out.join("sweep.json"), serde_json::to_string_pretty(&rows)? + "\n")?;
    print!("{}", sweep_csv(&rows));
    Ok(Outcome { manifest_path: out.join("manifest.json"), inputs: cache_files(dir, true) })
}

fn synth(a: SynthArgs, res: &mut Resolver) -> anyhow::Result<Outcome> {
    let datasets = res.get("datasets", a.datasets, DatasetId::ALL.to_vec())?;
    let seed = res.get("seed", a.seed, 0)?;
    let out: PathBuf = res.require("out", a.out)?;
    let written = hsrocket::synth::write_dataset_dir(&out, &datasets, seed)?;
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(Outcome { manifest_path: out.join("synth.manifest.json"), inputs: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn version_lists_current_formats() {
        let formats = [
            ("cache", hsrocket::ingest::CACHE_FORMAT_VERSION),
            ("labels", hsrocket::labeling::LABEL_FORMAT_VERSION),
            ("bank", hsrocket::kernels::BANK_FORMAT_VERSION),
            ("features", hsrocket::transform::FEATURE_FORMAT_VERSION),
            ("model", hsrocket::classify::MODEL_FORMAT_VERSION),
            ("report", hsrocket::eval::REPORT_FORMAT_VERSION),
        ];
        for (name, v) in formats {
            assert!(VERSION.contains(&format!("{name} {v}")), "{name}");
        }
    }
}

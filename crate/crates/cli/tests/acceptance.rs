//! Acceptance checks, one line per criterion.
//!
//! Runs on the CMAPSS training files in `$CMAPSS_DIR` when present and on
//! seeded surrogate files otherwise. Windows are taken every few cycles to
//! keep the classification runs short. Criteria whose thresholds depend on
//! the data (1, 2 and 4) are reported without failing the run; all other
//! criteria must pass.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use hsrocket::classify::ClassifierKind;
use hsrocket::eval::{compute_metrics, run_experiment, DatasetInput, ExperimentConfig, Protocol, RunRecord};
use hsrocket::ingest::{parse_cmapss, DatasetId, IngestedDataset, RawTrajectory, SensorSelection, Split};
use hsrocket::kernels::{
    generate_minirocket, generate_rocket, ChannelMode, KernelBank, KernelSpec, Pooling, Variant, MINIROCKET_PATTERNS,
};
use hsrocket::labeling::{build_labels, fit_weibull_curve, hazard, sg_smooth, LabelConfig, LabelSet};
use hsrocket::transform::transform_all;
use hsrocket::{Matrix, TimeSeriesWindow, WindowId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYNTH_SEED: u64 = 2024;
const SPLIT_SEED: u64 = 7;
const MASTER_SEED: u64 = 1;
const SEEDS: usize = 5;
const FD001_STRIDE: usize = 5;
const FD004_STRIDE: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn trajectories(dataset: DatasetId) -> (Vec<RawTrajectory>, &'static str) {
    if let Some(dir) = std::env::var_os("CMAPSS_DIR") {
        let path = Path::new(&dir).join(dataset.train_file_name());
        if path.exists() {
            return (parse_cmapss(&path, dataset).expect("CMAPSS file parses"), "cmapss");
        }
    }
    (hsrocket::synth::generate(dataset, SYNTH_SEED), "surrogate")
}

fn prepare(dataset: DatasetId, stride: usize) -> (IngestedDataset, LabelSet) {
    let (trajs, _) = trajectories(dataset);
    let ds = IngestedDataset::build(dataset, &trajs, &SensorSelection::default(), 30, stride, 0.2, SPLIT_SEED)
        .expect("ingest");
    let labels = build_labels(&ds, &LabelConfig::default()).expect("labels");
    (ds, labels)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn rocket_runs(fd001: &(IngestedDataset, LabelSet), kernels: usize) -> (Vec<RunRecord>, f64) {
    let mut cfg = ExperimentConfig::for_protocol(Protocol::Exp2);
    cfg.kernels = kernels;
    cfg.variants = vec![Variant::Rocket];
    cfg.repeats = SEEDS;
    cfg.seed = MASTER_SEED;
    let start = Instant::now();
    let out = run_experiment(&[DatasetInput { dataset: &fd001.0, labels: &fd001.1 }], &cfg).expect("experiment");
    (out.report.runs, start.elapsed().as_secs_f64() / SEEDS as f64)
}

fn accuracies(runs: &[RunRecord]) -> Vec<f64> {
    runs.iter().map(|r| r.metrics.accuracy).collect()
}

fn criterion_1(runs_5000: &[RunRecord], secs: f64) -> Outcome {
    let acc = mean(runs_5000.iter().map(|r| r.metrics.accuracy));
    let f1 = mean(runs_5000.iter().map(|r| r.metrics.macro_f1));
    outcome(
        acc >= 0.88 && secs <= 300.0,
        format!("ROCKET 5000 FD001 mean ACC {:.2}% macro-F1 {:.2}% over {SEEDS} seeds (need >= 88%); {secs:.1}s per run", 100.0 * acc, 100.0 * f1),
    )
}

fn criterion_2(runs_100: &[RunRecord], runs_500: &[RunRecord], runs_5000: &[RunRecord]) -> Outcome {
    let (a100, a500, a5000) = (
        mean(accuracies(runs_100).into_iter()),
        mean(accuracies(runs_500).into_iter()),
        mean(accuracies(runs_5000).into_iter()),
    );
    outcome(
        a500 >= 0.85 && a5000 >= a100,
        format!(
            "mean ACC 100: {:.2}%, 500: {:.2}% (need >= 85%), 5000: {:.2}% (need >= 100-kernel mean)",
            100.0 * a100,
            100.0 * a500,
            100.0 * a5000
        ),
    )
}

fn criterion_3(fd001: &(IngestedDataset, LabelSet)) -> Outcome {
    let mut windows = fd001.0.windows(Split::Train, None).unwrap();
    windows.extend(fd001.0.windows(Split::Test, None).unwrap());
    let rocket = generate_rocket(4998, 14, 30, 3, ChannelMode::Subset).unwrap();
    let mini = generate_minirocket(10_000, 14, 30, 3, ChannelMode::Subset, &windows).unwrap();
    assert_eq!(rocket.feature_count(), mini.feature_count());
    let time = |bank: &KernelBank| {
        (0..3)
            .map(|_| {
                let start = Instant::now();
                transform_all(&windows, bank, 1).unwrap();
                start.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (t_rocket, t_mini) = (time(&rocket), time(&mini));
    outcome(
        t_mini <= t_rocket / 3.0,
        format!(
            "{} features on {} windows, one thread: ROCKET {t_rocket:.2}s, MiniROCKET {t_mini:.2}s ({:.1}x, need >= 3x)",
            mini.feature_count(),
            windows.len(),
            t_rocket / t_mini
        ),
    )
}

fn criterion_4() -> Outcome {
    let fd004 = prepare(DatasetId::FD004, FD004_STRIDE);
    let mut cfg = ExperimentConfig::for_protocol(Protocol::Exp3);
    cfg.repeats = SEEDS;
    cfg.seed = MASTER_SEED;
    let out = run_experiment(&[DatasetInput { dataset: &fd004.0, labels: &fd004.1 }], &cfg).expect("exp3");
    let acc = |kind: ClassifierKind, repeat: usize| {
        out.report
            .runs
            .iter()
            .find(|r| r.classifier == kind && r.repeat == repeat)
            .map(|r| r.metrics.accuracy)
            .unwrap()
    };
    let mean_of = |kind| mean((0..SEEDS).map(|r| acc(kind, r)));
    let (ridge, svm, lda) = (mean_of(ClassifierKind::Ridge), mean_of(ClassifierKind::Svm), mean_of(ClassifierKind::Lda));
    let wins = (0..SEEDS)
        .filter(|&r| acc(ClassifierKind::Lda, r).max(acc(ClassifierKind::Svm, r)) > acc(ClassifierKind::Ridge, r))
        .count();
    outcome(
        svm.max(lda) >= ridge - 0.005 && wins >= 4,
        format!(
            "FD004 MiniROCKET {} PPV features: ridge {:.2}%, SVM {:.2}%, LDA {:.2}%; LDA or SVM ahead in {wins}/{SEEDS} seeds (need >= 4)",
            out.report.runs[0].n_features,
            100.0 * ridge,
            100.0 * svm,
            100.0 * lda
        ),
    )
}

fn naive_features(window: &Matrix, spec: &KernelSpec) -> Vec<f64> {
    let (len, pad) = (window.cols(), spec.padding_width());
    let span = (spec.length - 1) * spec.dilation;
    let padded_len = len + 2 * pad;
    let response: Vec<f64> = if padded_len <= span {
        Vec::new()
    } else {
        (0..padded_len - span)
            .map(|j| {
                let mut acc = 0.0;
                for (slot, &ch) in spec.channels.iter().enumerate() {
                    for k in 0..spec.length {
                        let pos = j + k * spec.dilation;
                        if pos >= pad && pos < pad + len {
                            acc += spec.weights[slot * spec.length + k] * window.get(ch, pos - pad);
                        }
                    }
                }
                acc
            })
            .collect()
    };
    let mut out = Vec::new();
    for pooling in &spec.features {
        match pooling {
            Pooling::Ppv => {
                for b in &spec.biases {
                    let positive = response.iter().filter(|r| **r + b > 0.0).count();
                    out.push(if response.is_empty() { 0.0 } else { positive as f64 / response.len() as f64 });
                }
            }
            Pooling::Max => out.push(response.iter().cloned().reduce(f64::max).unwrap_or(0.0)),
        }
    }
    out
}

fn random_windows(rng: &mut ChaCha8Rng, n: usize, m: usize, len: usize) -> Vec<TimeSeriesWindow> {
    (0..n)
        .map(|i| TimeSeriesWindow {
            id: WindowId { unit_id: i as u32 + 1, end_cycle: len as u32 },
            values: Matrix::from_fn(m, len, |_, _| rng.random_range(-2.0..2.0)),
            label: None,
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut pairs, mut worst, mut ppv_ok) = (0usize, 0.0f64, true);
    let (mut padded, mut dilated, mut multichannel) = (0, 0, 0);
    for case in 0..30u64 {
        let m = 1 + (case as usize % 4);
        let len = rng.random_range(12..60);
        let bank = if case % 3 == 2 {
            let pool = random_windows(&mut rng, 6, m, len);
            generate_minirocket(400, m, len, case, ChannelMode::Subset, &pool).unwrap()
        } else {
            generate_rocket(40, m, len, case, ChannelMode::Subset).unwrap()
        };
        let windows = random_windows(&mut rng, 3, m, len);
        let fast = transform_all(&windows, &bank, 0).unwrap();
        for (i, w) in windows.iter().enumerate() {
            let expected: Vec<f64> = bank.specs.iter().flat_map(|s| naive_features(&w.values, s)).collect();
            for ((got, want), meta) in fast.values.row(i).iter().zip(&expected).zip(&fast.feature_meta) {
                worst = worst.max((got - want).abs());
                if meta.pooling == Pooling::Ppv && !(0.0..=1.0).contains(got) {
                    ppv_ok = false;
                }
            }
            pairs += bank.specs.len();
        }
        padded += bank.specs.iter().filter(|s| s.padding).count();
        dilated += bank.specs.iter().filter(|s| s.dilation > 1).count();
        multichannel += bank.specs.iter().filter(|s| s.channels.len() > 1).count();
    }
    let mut monotone = true;
    for _ in 0..100 {
        let response: Vec<f64> = (0..rng.random_range(1..100)).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut biases: Vec<f64> = (0..10).map(|_| rng.random_range(-4.0..4.0)).collect();
        biases.sort_by(f64::total_cmp);
        let ppv: Vec<f64> = biases.iter().map(|b| hsrocket::transform::pool_ppv(&response, *b)).collect();
        monotone &= ppv.windows(2).all(|w| w[0] <= w[1]);
    }
    outcome(
        pairs >= 1000 && worst <= 1e-12 && ppv_ok && monotone && padded > 0 && dilated > 0 && multichannel > 0,
        format!(
            "{pairs} pairs ({padded} padded, {dilated} dilated, {multichannel} multichannel kernels), max |diff| {worst:.1e}; PPV in [0,1]: {ppv_ok}; monotone in bias: {monotone}"
        ),
    )
}

fn criterion_6(fd001: &(IngestedDataset, LabelSet)) -> Outcome {
    let bank = generate_rocket(10_000, 14, 30, 11, ChannelMode::Subset).unwrap();
    let freq: Vec<f64> = [7, 9, 11]
        .iter()
        .map(|l| bank.specs.iter().filter(|s| s.length == *l).count() as f64 / 10_000.0)
        .collect();
    let lengths_ok = freq.iter().all(|f| (0.30..=0.37).contains(f));

    let train = fd001.0.windows(Split::Train, None).unwrap();
    let mini = generate_minirocket(10_000, 14, 30, 11, ChannelMode::Subset, &train).unwrap();
    let patterns: std::collections::BTreeSet<[u8; 3]> = mini.specs.iter().filter_map(|s| s.pattern).collect();
    let sums_zero = mini
        .specs
        .iter()
        .all(|s| (0..s.channels.len()).all(|c| s.taps(c).iter().sum::<f64>() == 0.0));

    let rocket_again = KernelBank::from_manifest(&bank.manifest, &[]).unwrap();
    let mini_again = KernelBank::from_manifest(&mini.manifest, &train).unwrap();
    let identical = rocket_again.specs_json().unwrap() == bank.specs_json().unwrap()
        && mini_again.specs_json().unwrap() == mini.specs_json().unwrap();
    outcome(
        lengths_ok && patterns.len() == MINIROCKET_PATTERNS && sums_zero && identical,
        format!(
            "length freq 7/9/11 = {:.4}/{:.4}/{:.4}; {} MiniROCKET patterns; tap sums zero: {sums_zero}; regeneration identical: {identical}",
            freq[0],
            freq[1],
            freq[2],
            patterns.len()
        ),
    )
}

fn criterion_7(fd001: &(IngestedDataset, LabelSet)) -> Outcome {
    let mut sg_err = 0.0f64;
    for degree in 0..=3 {
        let y: Vec<f64> = (0..80)
            .map(|i| {
                let t = i as f64 / 20.0;
                (0..=degree).map(|d| (1.0 + d as f64 * 0.7) * t.powi(d)).sum::<f64>()
            })
            .collect();
        let s = sg_smooth(&y, 21, 3).unwrap();
        sg_err = s.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(sg_err, f64::max);
    }

    let mut weibull_err = 0.0f64;
    for (beta, k, a) in [(2.5, 30.0, 1.0), (4.0, 12.0, 0.5), (1.8, 60.0, -0.2)] {
        let t: Vec<f64> = (1..=220).map(f64::from).collect();
        let eta = 220.0;
        let y: Vec<f64> = t.iter().map(|&x| a - k * hazard(x, beta, eta)).collect();
        let fit = fit_weibull_curve(&y, &t).unwrap();
        let p = fit.params.expect("fit converges");
        // compare the identifiable quantities: shape, offset and k / eta^shape
        let rel = |got: f64, want: f64| ((got - want) / want).abs();
        weibull_err = weibull_err
            .max(rel(p.shape, beta))
            .max(rel(p.offset, a))
            .max(rel(p.amplitude / p.scale.powf(p.shape), k / eta.powf(beta)));
    }

    let labels = &fd001.1;
    let monotone = labels.labels.values().all(|l| l.windows(2).all(|w| w[0] <= w[1]));
    let c = labels.summary.config.classes;
    let counts: Vec<usize> = (0..c)
        .map(|k| labels.labels.values().flatten().filter(|v| **v == k).count())
        .collect();
    let total: usize = counts.iter().sum();
    let freqs: Vec<f64> = counts.iter().map(|n| *n as f64 / total as f64).collect();
    let balanced = freqs.iter().all(|f| *f >= 0.5 / c as f64 && *f <= 2.0 / c as f64);
    outcome(
        sg_err < 1e-9 && weibull_err < 1e-3 && monotone && balanced,
        format!(
            "S-G max error {sg_err:.1e}; Weibull max rel error {weibull_err:.1e}; labels monotone: {monotone}; class freq {:?}",
            freqs.iter().map(|f| format!("{f:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut exact = true;
    for _ in 0..1000 {
        let c = rng.random_range(2..6);
        let n = rng.random_range(1..60);
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let m = compute_metrics(&truth, &pred, c).unwrap();
        let correct = truth.iter().zip(&pred).filter(|(t, p)| t == p).count();
        let mut f1 = 0.0;
        for k in 0..c {
            let tp = truth.iter().zip(&pred).filter(|(t, p)| **t == k && **p == k).count() as f64;
            let pp = pred.iter().filter(|p| **p == k).count() as f64;
            let ap = truth.iter().filter(|t| **t == k).count() as f64;
            let (pr, rc) = (if pp > 0.0 { tp / pp } else { 0.0 }, if ap > 0.0 { tp / ap } else { 0.0 });
            f1 += if pr + rc > 0.0 { 2.0 * pr * rc / (pr + rc) } else { 0.0 };
        }
        exact &= m.accuracy == correct as f64 / n as f64 && m.macro_f1 == f1 / c as f64;
    }
    let half = compute_metrics(&[0, 0, 1, 1], &[0, 1, 0, 1], 2).unwrap();
    let truth: Vec<usize> = (0..100).map(|i| i % 4).collect();
    let one_class = compute_metrics(&truth, &[2; 100], 4).unwrap();
    let hand = half.accuracy == 0.5
        && half.macro_f1 == 0.5
        && one_class.accuracy == 0.25
        && (one_class.macro_f1 - 0.1).abs() < 1e-15;
    outcome(
        exact && hand,
        format!(
            "1000 random cases exact: {exact}; hand cases ACC {} / F1 {}, one-class F1 {}",
            half.accuracy, half.macro_f1, one_class.macro_f1
        ),
    )
}

fn hsrocket(dir: &Path, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_hsrocket"))
        .current_dir(dir)
        .args(args)
        .status()
        .expect("binary runs");
    assert!(status.success(), "hsrocket {args:?} failed");
}

fn pipeline(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    hsrocket(dir, &["synth", "--datasets", "FD001", "--seed", "3", "--out", "data"]);
    hsrocket(dir, &["ingest", "--dataset", "FD001", "--data-dir", "data", "--stride", "10", "--seed", "7", "--out", "cache/FD001"]);
    hsrocket(dir, &["label", "--cache", "cache/FD001"]);
    hsrocket(
        dir,
        &["experiment", "--protocol", "exp1", "--cache", "cache", "--kernels", "100", "--repeats", "2", "--seed", "9", "--out", "out"],
    );
    let mut files = Vec::new();
    for sub in ["cache/FD001", "out"] {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir.join(sub))
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.file_name().unwrap() != "timings.json")
            .collect();
        entries.sort();
        for p in entries {
            let bytes = std::fs::read(&p).unwrap();
            files.push((p.strip_prefix(dir).unwrap().to_path_buf(), bytes));
        }
    }
    files
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let first = pipeline(dir.path());
    for sub in ["data", "cache", "out"] {
        std::fs::remove_dir_all(dir.path().join(sub)).unwrap();
    }
    let second = pipeline(dir.path());
    let differing: Vec<String> = first
        .iter()
        .zip(&second)
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.0.display().to_string())
        .collect();
    outcome(
        first.len() == second.len() && differing.is_empty(),
        format!("{} output files compared after replaying from scratch; differing: {differing:?}", first.len()),
    )
}

fn main() {
    // `cargo test -- <filter>` style arguments are accepted and ignored
    let (_, source) = trajectories(DatasetId::FD001);
    println!("acceptance: data source {source}, FD001 stride {FD001_STRIDE}, FD004 stride {FD004_STRIDE}, {SEEDS} seeds");
    let start = Instant::now();
    let fd001 = prepare(DatasetId::FD001, FD001_STRIDE);

    let (runs_5000, secs_5000) = rocket_runs(&fd001, 5000);
    let (runs_500, _) = rocket_runs(&fd001, 500);
    let (runs_100, _) = rocket_runs(&fd001, 100);

    type Check<'a> = Box<dyn FnOnce() -> Outcome + 'a>;
    let checks: Vec<(u8, bool, Check)> = vec![
        (1, false, Box::new(|| criterion_1(&runs_5000, secs_5000))),
        (2, false, Box::new(|| criterion_2(&runs_100, &runs_500, &runs_5000))),
        (3, true, Box::new(|| criterion_3(&fd001))),
        (4, false, Box::new(criterion_4)),
        (5, true, Box::new(criterion_5)),
        (6, true, Box::new(|| criterion_6(&fd001))),
        (7, true, Box::new(|| criterion_7(&fd001))),
        (8, true, Box::new(criterion_8)),
        (9, true, Box::new(criterion_9)),
    ];

    let mut gating_failures = Vec::new();
    for (id, gating, check) in checks {
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        let note = if gating { "" } else { " [reported]" };
        println!("criterion {id}: {verdict}{note}  {}", result.detail);
        if gating && !result.pass {
            gating_failures.push(id);
        }
    }
    println!("acceptance finished in {:.0}s", start.elapsed().as_secs_f64());
    if !gating_failures.is_empty() {
        eprintln!("gating criteria failed: {gating_failures:?}");
        std::process::exit(1);
    }
}

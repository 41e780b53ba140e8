//! Seeded surrogate run-to-failure data in the CMAPSS text layout.
//!
//! The generator mimics the structure the pipeline depends on: units of
//! varying life, sensors that are constant, that rise, or that fall with
//! an accelerating wear curve, measurement noise of realistic size, and
//! for FD002/FD004 six operating regimes that shift every sensor. It is
//! used when the real files are not available and in tests.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::ingest::{DatasetId, RawTrajectory, SENSOR_COUNT};
use crate::rng::{derive_seed, stream_rng};

/// Baseline, noise std, end-of-life drift and printed decimals per sensor.
struct SensorModel {
    base: f64,
    sigma: f64,
    drift: f64,
    decimals: i32,
}

const fn sensor(base: f64, sigma: f64, drift: f64, decimals: i32) -> SensorModel {
    SensorModel { base, sigma, drift, decimals }
}

const SENSORS: [SensorModel; SENSOR_COUNT] = [
    sensor(518.67, 0.0, 0.0, 2),
    sensor(642.68, 0.35, 1.2, 2),
    sensor(1590.5, 5.0, 15.0, 2),
    sensor(1408.9, 6.5, 25.0, 2),
    sensor(14.62, 0.0, 0.0, 2),
    sensor(21.61, 0.0, 0.0, 2),
    sensor(553.37, 0.6, -2.5, 2),
    sensor(2388.06, 0.05, 0.22, 2),
    sensor(9065.0, 10.0, 25.0, 2),
    sensor(1.3, 0.0, 0.0, 2),
    sensor(47.54, 0.2, 1.0, 2),
    sensor(521.41, 0.5, -2.2, 2),
    sensor(2388.06, 0.05, 0.22, 2),
    sensor(8143.75, 10.0, 20.0, 2),
    sensor(8.442, 0.03, 0.1, 4),
    sensor(0.03, 0.0, 0.0, 2),
    sensor(393.0, 1.2, 4.0, 0),
    sensor(2388.0, 0.0, 0.0, 0),
    sensor(100.0, 0.0, 0.0, 2),
    sensor(38.82, 0.15, -0.6, 2),
    sensor(23.29, 0.09, -0.35, 4),
];

/// Sensors whose drift reverses under the second fault mode.
const FAULT2_FLIPPED: [usize; 4] = [7, 8, 12, 13];

const REGIMES: [[f64; 3]; 6] = [
    [0.0, 0.0, 100.0],
    [10.0, 0.25, 100.0],
    [20.0, 0.7, 100.0],
    [25.0, 0.62, 60.0],
    [35.0, 0.84, 100.0],
    [42.0, 0.84, 100.0],
];

struct DatasetShape {
    units: usize,
    min_life: usize,
    max_life: usize,
    regimes: usize,
    fault_modes: usize,
}

fn shape(dataset: DatasetId) -> DatasetShape {
    match dataset {
        DatasetId::FD001 => DatasetShape { units: 100, min_life: 128, max_life: 362, regimes: 1, fault_modes: 1 },
        DatasetId::FD002 => DatasetShape { units: 260, min_life: 128, max_life: 378, regimes: 6, fault_modes: 1 },
        DatasetId::FD003 => DatasetShape { units: 100, min_life: 145, max_life: 525, regimes: 1, fault_modes: 2 },
        DatasetId::FD004 => DatasetShape { units: 249, min_life: 128, max_life: 543, regimes: 6, fault_modes: 2 },
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}

/// Surrogate training file contents for `dataset` with its usual unit count.
pub fn generate(dataset: DatasetId, seed: u64) -> Vec<RawTrajectory> {
    generate_units(dataset, seed, shape(dataset).units)
}

/// Like [`generate`] but with an explicit number of units.
pub fn generate_units(dataset: DatasetId, seed: u64, units: usize) -> Vec<RawTrajectory> {
    let shape = shape(dataset);
    let base_seed = derive_seed(seed, dataset.as_str(), 0);

    // per-regime sensor gains; regime 0 is the sea-level reference
    let mut regime_rng = stream_rng(base_seed, u64::MAX);
    let gains: Vec<[f64; SENSOR_COUNT]> = (0..shape.regimes)
        .map(|r| {
            let mut g = [1.0; SENSOR_COUNT];
            if r > 0 {
                for v in g.iter_mut() {
                    *v = regime_rng.random_range(0.8..1.0);
                }
            }
            g
        })
        .collect();

    let unit_noise = Normal::new(0.0, 0.3).expect("valid std");
    let meas_noise = Normal::new(0.0, 1.0).expect("valid std");
    let setting_noise = Normal::new(0.0, 1.0).expect("valid std");

    (0..units)
        .map(|u| {
            let mut rng = stream_rng(base_seed, u as u64);
            let frac: f64 = rng.random();
            let life = shape.min_life + ((shape.max_life - shape.min_life) as f64 * frac * frac).round() as usize;
            let rho: f64 = rng.random_range(3.5..6.0);
            let wear0: f64 = rng.random_range(0.0..0.15);
            let fault2 = shape.fault_modes == 2 && rng.random_bool(0.5);
            let offsets: Vec<f64> = SENSORS.iter().map(|s| unit_noise.sample(&mut rng) * s.sigma).collect();

            let mut traj = RawTrajectory {
                unit_id: u as u32 + 1,
                cycles: Vec::with_capacity(life),
                op_settings: [Vec::with_capacity(life), Vec::with_capacity(life), Vec::with_capacity(life)],
                sensors: (0..SENSOR_COUNT).map(|_| Vec::with_capacity(life)).collect(),
            };
            let denom = rho.exp_m1();
            for t in 1..=life {
                let wear = wear0 + (1.0 - wear0) * (rho * t as f64 / life as f64).exp_m1() / denom;
                let regime = if shape.regimes > 1 { rng.random_range(0..shape.regimes) } else { 0 };
                let nominal = REGIMES[regime];
                traj.cycles.push(t as u32);
                traj.op_settings[0].push(round_to(nominal[0] + 0.002 * setting_noise.sample(&mut rng), 4));
                traj.op_settings[1].push(round_to(nominal[1] + 0.0003 * setting_noise.sample(&mut rng), 4));
                traj.op_settings[2].push(nominal[2]);
                for (k, model) in SENSORS.iter().enumerate() {
                    let mut drift = model.drift;
                    if fault2 && FAULT2_FLIPPED.contains(&k) {
                        drift = -drift;
                    }
                    let gain = gains[regime][k];
                    let clean = (model.base + offsets[k] + drift * wear) * gain;
                    let value = clean + model.sigma * gain * meas_noise.sample(&mut rng);
                    traj.sensors[k].push(round_to(value, model.decimals));
                }
            }
            traj
        })
        .collect()
}

/// Writes trajectories as whitespace-separated CMAPSS rows.
pub fn write_cmapss<W: Write>(mut out: W, trajectories: &[RawTrajectory]) -> Result<()> {
    for traj in trajectories {
        for i in 0..traj.len() {
            write!(out, "{} {}", traj.unit_id, traj.cycles[i])?;
            for setting in &traj.op_settings {
                write!(out, " {}", setting[i])?;
            }
            for series in &traj.sensors {
                write!(out, " {}", series[i])?;
            }
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes `train_FDxxx.txt` surrogates for `datasets` into `dir`.
pub fn write_dataset_dir(dir: &Path, datasets: &[DatasetId], seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    datasets
        .iter()
        .map(|&d| {
            let path = dir.join(d.train_file_name());
            let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
            write_cmapss(file, &generate(d, seed))?;
            Ok(path)
        })
        .collect()
}

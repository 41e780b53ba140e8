use serde::{Deserialize, Serialize};

use super::{select_sensors, RawTrajectory, SensorSelection};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Standard deviations below this are treated as constant sensors.
pub const MIN_STD: f64 = 1e-12;

/// Per-sensor Z-score statistics (sample standard deviation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub sensors: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// True where the sensor was constant and its std replaced by 1.
    pub substituted: Vec<bool>,
    pub fitted_on: String,
}

/// Pools every timestep of every trajectory per sensor.
pub fn fit_standardizer(
    trajs: &[RawTrajectory],
    sensors: &SensorSelection,
    fitted_on: &str,
) -> Result<StandardizationStats> {
    let n: usize = trajs.iter().map(RawTrajectory::len).sum();
    if trajs.is_empty() || n < 2 {
        return Err(Error::Degenerate(format!(
            "standardizer needs at least 2 pooled samples, got {n}"
        )));
    }
    let m = sensors.len();
    let mut mean = vec![0.0; m];
    let mut std = vec![0.0; m];
    let mut substituted = vec![false; m];

    for (j, &k) in sensors.indices().iter().enumerate() {
        let values = || trajs.iter().flat_map(|t| t.sensors[k].iter().copied());
        let mu = values().sum::<f64>() / n as f64;
        let ss: f64 = values().map(|v| (v - mu) * (v - mu)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        mean[j] = mu;
        if sd < MIN_STD {
            log::warn!(
                "sensor {} is constant on {fitted_on}; using std = 1",
                sensors.names()[j]
            );
            std[j] = 1.0;
            substituted[j] = true;
        } else {
            std[j] = sd;
        }
    }

    Ok(StandardizationStats {
        sensors: sensors.names().to_vec(),
        mean,
        std,
        substituted,
        fitted_on: fitted_on.to_string(),
    })
}

/// Z-scores the selected sensors of one trajectory (m × T).
pub fn apply_standardizer(
    traj: &RawTrajectory,
    sensors: &SensorSelection,
    stats: &StandardizationStats,
) -> Result<Matrix> {
    if stats.sensors.as_slice() != sensors.names() {
        return Err(Error::Shape(format!(
            "stats cover {:?}, selection is {:?}",
            stats.sensors,
            sensors.names()
        )));
    }
    let mut m = select_sensors(traj, sensors);
    for j in 0..m.rows() {
        let (mu, sd) = (stats.mean[j], stats.std[j]);
        for v in m.row_mut(j) {
            *v = (*v - mu) / sd;
        }
    }
    Ok(m)
}

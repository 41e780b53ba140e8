use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::stream_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(Error::Format(format!("unknown split `{s}`"))),
        }
    }
}

/// Identifies a window by its unit and the (1-based) cycle it ends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WindowId {
    pub unit_id: u32,
    pub end_cycle: u32,
}

/// One multivariate window: m channels × L timesteps, standardized units.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesWindow {
    pub id: WindowId,
    pub values: Matrix,
    pub label: Option<usize>,
}

impl TimeSeriesWindow {
    pub fn channels(&self) -> usize {
        self.values.rows()
    }

    pub fn len(&self) -> usize {
        self.values.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.cols() == 0
    }
}

/// Cuts a standardized trajectory (m × T) into windows ending at cycles
/// `L, L + stride, ... <= T`. Each window takes the label of its end cycle.
pub fn make_windows(
    unit_id: u32,
    std_traj: &Matrix,
    labels: Option<&[usize]>,
    window_len: usize,
    stride: usize,
) -> Result<Vec<TimeSeriesWindow>> {
    if window_len < 2 {
        return Err(Error::Config(format!(
            "window length must be >= 2, got {window_len}"
        )));
    }
    if stride == 0 {
        return Err(Error::Config("window stride must be positive".into()));
    }
    let t = std_traj.cols();
    if let Some(l) = labels {
        if l.len() != t {
            return Err(Error::Shape(format!(
                "unit {unit_id}: {} labels for {t} cycles",
                l.len()
            )));
        }
    }
    if t < window_len {
        log::warn!("unit {unit_id}: {t} cycles < window {window_len}, skipped");
        return Ok(Vec::new());
    }

    let m = std_traj.rows();
    let mut out = Vec::with_capacity((t - window_len) / stride + 1);
    let mut end = window_len;
    while end <= t {
        let start = end - window_len;
        let mut values = Matrix::zeros(m, window_len);
        for ch in 0..m {
            values
                .row_mut(ch)
                .copy_from_slice(std_traj.row_range(ch, start, end));
        }
        out.push(TimeSeriesWindow {
            id: WindowId {
                unit_id,
                end_cycle: end as u32,
            },
            values,
            label: labels.map(|l| l[end - 1]),
        });
        end += stride;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitSplit {
    pub train: Vec<u32>,
    pub test: Vec<u32>,
}

impl UnitSplit {
    pub fn side(&self, unit: u32) -> Option<Split> {
        if self.train.binary_search(&unit).is_ok() {
            Some(Split::Train)
        } else if self.test.binary_search(&unit).is_ok() {
            Some(Split::Test)
        } else {
            None
        }
    }
}

/// Seeded partition of engine units. Both sides are returned sorted.
pub fn split_by_unit(unit_ids: &[u32], test_fraction: f64, seed: u64) -> Result<UnitSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut ids = unit_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 units to split, got {}",
            ids.len()
        )));
    }
    let n_test = (ids.len() as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test == ids.len() {
        return Err(Error::Config(format!(
            "test fraction {test_fraction} leaves one side empty for {} units",
            ids.len()
        )));
    }
    ids.shuffle(&mut stream_rng(seed, 0x5EED_5B17));
    let mut test = ids[..n_test].to_vec();
    let mut train = ids[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok(UnitSplit { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(m: usize, t: usize) -> Matrix {
        Matrix::from_fn(m, t, |i, j| (i * 1000 + j) as f64)
    }

    #[test]
    fn window_counts_and_labels() {
        let traj = ramp(2, 5);
        let labels = [0, 0, 1, 2, 3];
        let w = make_windows(4, &traj, Some(&labels), 3, 1).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(
            w.iter().map(|x| x.id.end_cycle).collect::<Vec<_>>(),
            vec![3, 4, 5]
        );
        assert_eq!(
            w.iter().map(|x| x.label).collect::<Vec<_>>(),
            vec![Some(1), Some(2), Some(3)]
        );
        assert_eq!(w[0].values.row(1), &[1000.0, 1001.0, 1002.0]);
        assert_eq!(w[2].values.row(0), &[2.0, 3.0, 4.0]);

        assert_eq!(make_windows(1, &ramp(1, 3), None, 3, 1).unwrap().len(), 1);
        assert!(make_windows(1, &ramp(1, 2), None, 3, 1).unwrap().is_empty());
    }

    #[test]
    fn window_config_errors() {
        assert!(make_windows(1, &ramp(1, 5), None, 1, 1).is_err());
        assert!(make_windows(1, &ramp(1, 5), None, 3, 0).is_err());
        assert!(make_windows(1, &ramp(1, 5), Some(&[0, 1]), 3, 1).is_err());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ids: Vec<u32> = (1..=100).collect();
        let a = split_by_unit(&ids, 0.2, 42).unwrap();
        assert_eq!((a.train.len(), a.test.len()), (80, 20));
        assert_eq!(a, split_by_unit(&ids, 0.2, 42).unwrap());
        assert_ne!(a, split_by_unit(&ids, 0.2, 43).unwrap());

        let b = split_by_unit(&[7, 9], 0.5, 1).unwrap();
        assert_eq!((b.train.len(), b.test.len()), (1, 1));
    }

    #[test]
    fn split_rejects_empty_sides() {
        assert!(split_by_unit(&[1, 2, 3], 0.01, 0).is_err());
        assert!(split_by_unit(&[1, 2, 3], 0.99, 0).is_err());
        assert!(split_by_unit(&[1], 0.5, 0).is_err());
        assert!(split_by_unit(&[1, 2], 0.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn window_count_formula(t in 2usize..80, l in 2usize..40, stride in 1usize..7) {
            let w = make_windows(1, &ramp(1, t), None, l, stride).unwrap();
            let expected = if t >= l { (t - l) / stride + 1 } else { 0 };
            prop_assert_eq!(w.len(), expected);
        }

        #[test]
        fn split_is_a_disjoint_partition(n in 2u32..150, frac in 0.05f64..0.95, seed: u64) {
            let ids: Vec<u32> = (1..=n).collect();
            if let Ok(s) = split_by_unit(&ids, frac, seed) {
                prop_assert!(s.train.iter().all(|u| s.test.binary_search(u).is_err()));
                let mut all = [s.train.clone(), s.test.clone()].concat();
                all.sort_unstable();
                prop_assert_eq!(all, ids);
            }
        }
    }
}

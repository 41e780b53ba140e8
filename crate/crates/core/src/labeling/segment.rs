//! Slope-based health-status segmentation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-difference slope: central in the interior, one-sided at the ends.
pub fn slopes(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    y[1] - y[0]
                } else if i == n - 1 {
                    y[n - 1] - y[n - 2]
                } else {
                    (y[i + 1] - y[i - 1]) / 2.0
                }
            })
            .collect(),
    }
}

/// Degradation rate: the negated slope, so larger means faster decline.
pub fn steepness(hi_fit: &[f64]) -> Vec<f64> {
    slopes(hi_fit).into_iter().map(|s| -s).collect()
}

/// Linear-interpolation quantile of sorted data (numpy's default rule).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeThresholds {
    pub classes: usize,
    /// `classes - 1` ascending steepness cut points.
    pub cuts: Vec<f64>,
}

impl SlopeThresholds {
    /// Cut points at the `i / c` quantiles of the pooled steepness values.
    pub fn from_pool(pool: &[f64], classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::Config(format!("need at least 2 classes, got {classes}")));
        }
        if pool.len() < classes {
            return Err(Error::Degenerate(format!(
                "{} slope values cannot form {classes} classes",
                pool.len()
            )));
        }
        let mut sorted = pool.to_vec();
        if sorted.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite slope values".into()));
        }
        sorted.sort_by(f64::total_cmp);
        let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
        if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1e-300) {
            return Err(Error::Degenerate(
                "all slopes are equal; cannot segment health stages".into(),
            ));
        }
        let cuts = (1..classes)
            .map(|i| quantile_sorted(&sorted, i as f64 / classes as f64))
            .collect();
        Ok(Self { classes, cuts })
    }

    /// Stage per cycle: number of cut points strictly exceeded, then a
    /// running maximum so the stage never goes back.
    pub fn label(&self, hi_fit: &[f64]) -> Vec<usize> {
        let mut stage = 0;
        steepness(hi_fit)
            .into_iter()
            .map(|s| {
                let raw = self.cuts.iter().filter(|&&c| s > c).count();
                stage = stage.max(raw);
                stage
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_rules() {
        assert_eq!(slopes(&[0.0, 1.0, 4.0, 9.0]), vec![1.0, 2.0, 4.0, 5.0]);
        assert_eq!(slopes(&[3.0]), vec![0.0]);
    }

    #[test]
    fn linear_curve_is_degenerate() {
        let y: Vec<f64> = (0..50).map(|i| 1.0 - 0.01 * i as f64).collect();
        let pool = steepness(&y);
        assert!(matches!(
            SlopeThresholds::from_pool(&pool, 2),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn quantile_matches_linear_interpolation() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert_eq!(quantile_sorted(&s, 0.25), 1.75);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
    }

    #[test]
    fn labels_are_monotone_even_when_slope_recovers() {
        let th = SlopeThresholds {
            classes: 3,
            cuts: vec![0.5, 1.5],
        };
        // steepness 0, 0.5, 1.5, 2.5, 2, 0.5, 0
        let y = [0.0, 0.0, -1.0, -3.0, -6.0, -7.0, -7.0];
        let labels = th.label(&y);
        assert_eq!(labels, vec![0, 0, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn bad_class_count() {
        assert!(SlopeThresholds::from_pool(&[1.0, 2.0, 3.0], 1).is_err());
        assert!(SlopeThresholds::from_pool(&[1.0, 2.0], 3).is_err());
    }
}

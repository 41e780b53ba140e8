//! First-principal-component fusion of standardized sensors into a scalar
//! health index.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Fraction of each unit's cycles used for the start/end orientation check.
pub const ORIENTATION_FRACTION: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaFusion {
    pub mean: Vec<f64>,
    /// Unit-norm loading vector, oriented so the index degrades downward.
    pub direction: Vec<f64>,
    pub eigenvalue: f64,
    pub explained_variance_ratio: f64,
}

impl PcaFusion {
    /// Fits the leading component on the pooled cycles of every unit
    /// (each unit is m × T) and orients it.
    pub fn fit(units: &[&Matrix]) -> Result<Self> {
        let m = units.first().map_or(0, |u| u.rows());
        if m == 0 {
            return Err(Error::Degenerate("PCA needs at least one channel".into()));
        }
        if let Some(u) = units.iter().find(|u| u.rows() != m) {
            return Err(Error::Shape(format!(
                "unit with {} channels in a {m}-channel pool",
                u.rows()
            )));
        }
        let n: usize = units.iter().map(|u| u.cols()).sum();
        if n < m + 1 {
            return Err(Error::Degenerate(format!(
                "PCA pool has {n} rows for {m} channels"
            )));
        }

        let mut mean = vec![0.0; m];
        for u in units {
            for (ch, mu) in mean.iter_mut().enumerate() {
                *mu += u.row(ch).iter().sum::<f64>();
            }
        }
        mean.iter_mut().for_each(|v| *v /= n as f64);

        let mut cov = Mat::<f64>::zeros(m, m);
        for u in units {
            for a in 0..m {
                let ra = u.row(a);
                for b in 0..=a {
                    let rb = u.row(b);
                    let s: f64 = ra
                        .iter()
                        .zip(rb)
                        .map(|(x, y)| (x - mean[a]) * (y - mean[b]))
                        .sum();
                    cov[(a, b)] += s;
                }
            }
        }
        for a in 0..m {
            for b in 0..=a {
                let v = cov[(a, b)] / (n - 1) as f64;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }

        let eig = cov
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Singular(format!("covariance eigendecomposition failed: {e:?}")))?;
        let values: Vec<f64> = (0..m).map(|i| eig.S().column_vector()[i]).collect();
        let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tie_tol = 1e-12 * top.abs().max(1.0);
        let k = values
            .iter()
            .position(|&v| top - v <= tie_tol)
            .expect("non-empty spectrum");
        let mut direction: Vec<f64> = (0..m).map(|i| eig.U()[(i, k)]).collect();

        // deterministic sign before orientation: largest loading positive
        let pivot = direction
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if v.abs() > direction[best].abs() { i } else { best });
        if direction[pivot] < 0.0 {
            direction.iter_mut().for_each(|v| *v = -*v);
        }

        let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
        let mut fusion = Self {
            mean,
            direction,
            eigenvalue: top,
            explained_variance_ratio: if total > 0.0 { top.max(0.0) / total } else { 0.0 },
        };

        let drift: f64 = units
            .iter()
            .map(|u| {
                let hi = fusion.score(u).expect("shape checked");
                end_minus_start(&hi)
            })
            .sum();
        if drift > 0.0 {
            fusion.direction.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(fusion)
    }

    /// Per-cycle health index of one unit (m × T).
    pub fn score(&self, unit: &Matrix) -> Result<Vec<f64>> {
        if unit.rows() != self.direction.len() {
            return Err(Error::Shape(format!(
                "unit has {} channels, PCA fitted on {}",
                unit.rows(),
                self.direction.len()
            )));
        }
        let mut hi = vec![0.0; unit.cols()];
        for (ch, (&w, &mu)) in self.direction.iter().zip(&self.mean).enumerate() {
            for (h, &x) in hi.iter_mut().zip(unit.row(ch)) {
                *h += w * (x - mu);
            }
        }
        Ok(hi)
    }
}

/// Mean of the last 5% of a series minus the mean of its first 5%.
pub fn end_minus_start(hi: &[f64]) -> f64 {
    if hi.is_empty() {
        return 0.0;
    }
    let k = ((hi.len() as f64 * ORIENTATION_FRACTION).ceil() as usize).clamp(1, hi.len());
    let head = hi[..k].iter().sum::<f64>() / k as f64;
    let tail = hi[hi.len() - k..].iter().sum::<f64>() / k as f64;
    tail - head
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_channel_is_the_channel_up_to_sign() {
        // decreasing channel keeps its sign
        let x: Vec<f64> = (0..40).map(|i| 3.0 - 0.1 * i as f64).collect();
        let m = Matrix::from_rows(&[x.clone()]).unwrap();
        let pca = PcaFusion::fit(&[&m]).unwrap();
        let mu = x.iter().sum::<f64>() / 40.0;
        let hi = pca.score(&m).unwrap();
        for (h, v) in hi.iter().zip(&x) {
            assert!((h - (v - mu)).abs() < 1e-12);
        }
        assert!((pca.explained_variance_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn increasing_channel_is_flipped_to_degrade_downward() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64).powi(2) * 0.01).collect();
        let m = Matrix::from_rows(&[x]).unwrap();
        let pca = PcaFusion::fit(&[&m]).unwrap();
        assert!(pca.direction[0] < 0.0);
        assert!(end_minus_start(&pca.score(&m).unwrap()) < 0.0);
    }

    #[test]
    fn duplicated_channel_scores_scale_by_sqrt_two() {
        // zero-mean, decreasing
        let x: Vec<f64> = (0..21).map(|i| 10.0 - i as f64).collect();
        let m = Matrix::from_rows(&[x.clone(), x.clone()]).unwrap();
        let pca = PcaFusion::fit(&[&m]).unwrap();
        assert!((pca.explained_variance_ratio - 1.0).abs() < 1e-12);
        let hi = pca.score(&m).unwrap();
        for (h, v) in hi.iter().zip(&x) {
            assert!((h - v * 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_rows_is_degenerate() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap();
        assert!(matches!(PcaFusion::fit(&[&m]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn rank_deficient_pool_still_fits() {
        let m = Matrix::from_rows(&[vec![0.0; 10], vec![0.0; 10]]).unwrap();
        let pca = PcaFusion::fit(&[&m]).unwrap();
        let norm: f64 = pca.direction.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

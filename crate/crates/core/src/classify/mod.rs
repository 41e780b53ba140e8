//! Linear classifiers for high-dimensional kernel features: ridge with
//! leave-one-out alpha selection, squared-hinge linear SVM, and shrinkage
//! LDA. All three standardize features internally and share one
//! decision-function representation (`scores = W z + b`).

mod lda;
mod ridge;
mod svm;

pub use lda::{fit_lda, ledoit_wolf_shrinkage};
pub use ridge::{default_alpha_grid, fit_ridge};
pub use svm::{fit_svm, SvmParams};

use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Ridge,
    Svm,
    Lda,
}

impl ClassifierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Ridge => "ridge",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Lda => "lda",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ridge" => Ok(Self::Ridge),
            "svm" => Ok(Self::Svm),
            "lda" => Ok(Self::Lda),
            _ => Err(Error::Config(format!(
                "unknown classifier `{s}` (expected ridge|svm|lda)"
            ))),
        }
    }
}

/// Per-feature standardization fitted on training rows (population std;
/// near-constant columns get std 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(x: &Matrix) -> Self {
        let (n, p) = (x.rows(), x.cols());
        let mut mean = vec![0.0; p];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n.max(1) as f64);
        let mut var = vec![0.0; p];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n.max(1) as f64).sqrt();
                if sd < 1e-12 {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Self { mean, std }
    }

    pub(crate) fn transform_faer(&self, x: &Matrix) -> Mat<f64> {
        Mat::from_fn(x.rows(), x.cols(), |i, j| (x.get(i, j) - self.mean[j]) / self.std[j])
    }

    pub(crate) fn transform(&self, x: &Matrix) -> Matrix {
        let mut z = x.clone();
        for i in 0..z.rows() {
            for ((v, m), s) in z.row_mut(i).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        z
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Hyperparameters {
    Ridge {
        alpha: f64,
        alpha_grid: Vec<f64>,
        /// Leave-one-out mean squared error per grid value.
        cv_errors: Vec<f64>,
    },
    Svm {
        c: f64,
        tol: f64,
        max_iter: usize,
        seed: u64,
        /// Outer iterations used per one-vs-rest subproblem.
        iterations: Vec<usize>,
    },
    Lda {
        shrinkage: f64,
        estimated: bool,
    },
}

/// A fitted linear model: `scores[c] = weights[c] . z + intercepts[c]`
/// with `z` the standardized feature vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub format_version: u32,
    pub kind: ClassifierKind,
    pub classes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub scaler: FeatureScaler,
    pub hyperparameters: Hyperparameters,
    /// False when an iterative fit stopped at its iteration cap.
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_ref: Option<String>,
}

impl TrainedClassifier {
    pub fn n_features(&self) -> usize {
        self.scaler.mean.len()
    }

    /// n × c matrix of class scores.
    pub fn decision_values(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.n_features() && x.rows() > 0 {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.n_features(),
                x.cols()
            )));
        }
        let c = self.classes.len();
        let mut out = Matrix::zeros(x.rows(), c);
        let mut z = vec![0.0; self.n_features()];
        for i in 0..x.rows() {
            for (j, v) in x.row(i).iter().enumerate() {
                z[j] = (v - self.scaler.mean[j]) / self.scaler.std[j];
            }
            for k in 0..c {
                let s: f64 = self.weights[k].iter().zip(&z).map(|(w, v)| w * v).sum();
                out.set(i, k, s + self.intercepts[k]);
            }
        }
        Ok(out)
    }

    /// Argmax of the decision values; ties go to the lowest class id.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        let scores = self.decision_values(x)?;
        Ok(scores
            .iter_rows()
            .map(|row| self.classes[argmax(row)])
            .collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "model version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        Ok(model)
    }
}

/// Per-kind hyperparameters for [`fit_classifier`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub alphas: Vec<f64>,
    pub svm: SvmParams,
    /// `None` estimates LDA shrinkage with Ledoit-Wolf.
    pub lda_shrinkage: Option<f64>,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self { alphas: default_alpha_grid(), svm: SvmParams::default(), lda_shrinkage: None }
    }
}

pub fn fit_classifier(
    kind: ClassifierKind,
    x: &Matrix,
    y: &[usize],
    params: &ClassifierParams,
) -> Result<TrainedClassifier> {
    match kind {
        ClassifierKind::Ridge => fit_ridge(x, y, &params.alphas),
        ClassifierKind::Svm => fit_svm(x, y, params.svm),
        ClassifierKind::Lda => fit_lda(x, y, params.lda_shrinkage),
    }
}

/// First index of the maximum.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

/// Sorted distinct labels; at least two required.
pub(crate) fn class_ids(y: &[usize]) -> Result<Vec<usize>> {
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Degenerate(format!(
            "training labels contain {} class(es); need at least 2",
            classes.len()
        )));
    }
    Ok(classes)
}

pub(crate) fn check_xy(x: &Matrix, y: &[usize]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::Shape(format!(
            "{} feature rows against {} labels",
            x.rows(),
            y.len()
        )));
    }
    if x.rows() < 2 {
        return Err(Error::Degenerate("need at least 2 training samples".into()));
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite feature values".into()));
    }
    Ok(())
}

/// Columns of a faer matrix as owned rows (c × p).
pub(crate) fn columns_as_rows(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_on_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[2.0, 2.0]), 0);
    }

    #[test]
    fn scaler_handles_constant_columns() {
        let x = Matrix::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let s = FeatureScaler::fit(&x);
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
    }

    #[test]
    fn single_class_rejected() {
        assert!(class_ids(&[2, 2, 2]).is_err());
        assert_eq!(class_ids(&[3, 1, 3]).unwrap(), vec![1, 3]);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("SVM".parse::<ClassifierKind>().unwrap(), ClassifierKind::Svm);
        assert!("knn".parse::<ClassifierKind>().is_err());
    }
}

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_xy, class_ids, FeatureScaler, Hyperparameters, TrainedClassifier};
use super::{ClassifierKind, MODEL_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::stream_rng;

/// Bias feature appended to every standardized sample.
const BIAS_FEATURE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-4, max_iter: 1000, seed: 0 }
    }
}

pub(crate) struct BinarySvm {
    pub w: Vec<f64>,
    pub b: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective after each outer pass.
    #[cfg_attr(not(test), allow(dead_code))]
    pub objective: Vec<f64>,
}

/// One-vs-rest linear SVM with squared hinge loss, trained by dual
/// coordinate descent. The bias is learned as the weight of a constant
/// extra feature, so it is mildly regularized.
pub fn fit_svm(x: &Matrix, y: &[usize], params: SvmParams) -> Result<TrainedClassifier> {
    check_xy(x, y)?;
    if !(params.c.is_finite() && params.c > 0.0) || !(params.tol > 0.0) || params.max_iter == 0 {
        return Err(Error::Config("svm needs c > 0, tol > 0 and max_iter >= 1".into()));
    }
    let classes = class_ids(y)?;
    let scaler = FeatureScaler::fit(x);
    let z = scaler.transform(x);

    let fits: Vec<BinarySvm> = classes
        .par_iter()
        .enumerate()
        .map(|(k, class)| {
            let signs: Vec<f64> = y.iter().map(|v| if v == class { 1.0 } else { -1.0 }).collect();
            train_binary(&z, &signs, &params, k as u64)
        })
        .collect();

    let converged = fits.iter().all(|f| f.converged);
    if !converged {
        log::warn!(
            "svm: reached max_iter={} before tolerance {} in at least one subproblem",
            params.max_iter,
            params.tol
        );
    }
    Ok(TrainedClassifier {
        format_version: MODEL_FORMAT_VERSION,
        kind: ClassifierKind::Svm,
        classes,
        intercepts: fits.iter().map(|f| f.b).collect(),
        hyperparameters: Hyperparameters::Svm {
            c: params.c,
            tol: params.tol,
            max_iter: params.max_iter,
            seed: params.seed,
            iterations: fits.iter().map(|f| f.iterations).collect(),
        },
        weights: fits.into_iter().map(|f| f.w).collect(),
        scaler,
        converged,
        training_ref: None,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn train_binary(z: &Matrix, y: &[f64], params: &SvmParams, stream: u64) -> BinarySvm {
    let (n, p) = (z.rows(), z.cols());
    let diag = 0.5 / params.c;
    let q_diag: Vec<f64> = (0..n)
        .map(|i| dot(z.row(i), z.row(i)) + BIAS_FEATURE * BIAS_FEATURE + diag)
        .collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut rng = stream_rng(params.seed, stream);

    let mut active: Vec<usize> = (0..n).collect();
    let mut active_len = n;
    let mut pg_max_old = f64::INFINITY;
    let mut objective = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        active[..active_len].shuffle(&mut rng);
        let mut pg_max_new = f64::NEG_INFINITY;
        let mut pg_min_new = f64::INFINITY;

        let mut s = 0;
        while s < active_len {
            let i = active[s];
            let row = z.row(i);
            let g = y[i] * (dot(&w, row) + b * BIAS_FEATURE) - 1.0 + diag * alpha[i];
            let mut pg = g;
            if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active_len -= 1;
                    active.swap(s, active_len);
                    continue;
                }
                pg = g.min(0.0);
            }
            pg_max_new = pg_max_new.max(pg);
            pg_min_new = pg_min_new.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).max(0.0);
                let step = (alpha[i] - old) * y[i];
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += step * xj;
                }
                b += step * BIAS_FEATURE;
            }
            s += 1;
        }

        objective.push(0.5 * (dot(&w, &w) + b * b) + alpha.iter().map(|a| 0.5 * diag * a * a - a).sum::<f64>());

        if pg_max_new - pg_min_new <= params.tol {
            if active_len == n {
                converged = true;
                break;
            }
            active_len = n;
            pg_max_old = f64::INFINITY;
            continue;
        }
        pg_max_old = if pg_max_new <= 0.0 { f64::INFINITY } else { pg_max_new };
    }
    BinarySvm { w, b, iterations, converged, objective }
}

use faer::{Mat, Side};

use super::{check_xy, class_ids, columns_as_rows, FeatureScaler, Hyperparameters, TrainedClassifier};
use super::{ClassifierKind, MODEL_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Ten log-spaced values from 1e-3 to 1e3.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..10).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 9.0)).collect()
}

/// One-vs-rest ridge regression on ±1 targets. The regularization
/// strength is picked from `alphas` by exact leave-one-out mean squared
/// error, computed from one eigendecomposition of either the sample Gram
/// matrix (features >= samples) or the feature covariance.
pub fn fit_ridge(x: &Matrix, y: &[usize], alphas: &[f64]) -> Result<TrainedClassifier> {
    check_xy(x, y)?;
    if alphas.is_empty() || alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::Config("alpha grid must hold positive finite values".into()));
    }
    let classes = class_ids(y)?;
    let (n, p, c) = (x.rows(), x.cols(), classes.len());
    let scaler = FeatureScaler::fit(x);
    let z = scaler.transform_faer(x);

    let mut targets = Mat::from_fn(n, c, |i, k| if y[i] == classes[k] { 1.0 } else { -1.0 });
    let target_mean: Vec<f64> = (0..c)
        .map(|k| (0..n).map(|i| targets[(i, k)]).sum::<f64>() / n as f64)
        .collect();
    for k in 0..c {
        for i in 0..n {
            targets[(i, k)] -= target_mean[k];
        }
    }

    // basis: columns of `u` span the fitted space, `lam` the matching
    // squared singular values of the centred design
    let dual = p >= n;
    let (u, lam, v) = if dual {
        let gram = &z * z.transpose();
        let eig = gram
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Singular(format!("gram eigendecomposition failed: {e:?}")))?;
        let lam: Vec<f64> = (0..n).map(|i| eig.S().column_vector()[i].max(0.0)).collect();
        (eig.U().to_owned(), lam, None)
    } else {
        let cov = z.transpose() * &z;
        let eig = cov
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Singular(format!("covariance eigendecomposition failed: {e:?}")))?;
        let lam: Vec<f64> = (0..p).map(|i| eig.S().column_vector()[i].max(0.0)).collect();
        let vmat = eig.U().to_owned();
        let proj = &z * &vmat;
        (proj, lam, Some(vmat))
    };
    let r = lam.len();
    let projected = u.transpose() * &targets; // r × c
    let u_sq: Vec<f64> = (0..n * r).map(|idx| u[(idx / r, idx % r)].powi(2)).collect();

    // In the dual basis u is orthonormal and fitted = U diag(l/(l+a)) U'y.
    // In the primal basis u = Z V is orthogonal with norms l, so
    // fitted = U diag(1/(l+a)) U'y.
    let shrink = |j: usize, alpha: f64| {
        if dual {
            lam[j] / (lam[j] + alpha)
        } else {
            1.0 / (lam[j] + alpha)
        }
    };

    let mut cv_errors = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let factors: Vec<f64> = (0..r).map(|j| shrink(j, alpha)).collect();
        let mut sse = 0.0;
        for i in 0..n {
            let h = 1.0 / n as f64
                + (0..r).map(|j| u_sq[i * r + j] * factors[j]).sum::<f64>();
            let denom = 1.0 - h;
            for k in 0..c {
                let fitted: f64 = (0..r).map(|j| u[(i, j)] * factors[j] * projected[(j, k)]).sum();
                let resid = (targets[(i, k)] - fitted) / denom;
                sse += resid * resid;
            }
        }
        cv_errors.push(sse / (n * c) as f64);
    }
    let best = cv_errors
        .iter()
        .enumerate()
        .fold(0, |b, (i, e)| if *e < cv_errors[b] { i } else { b });
    let alpha = alphas[best];
    log::info!("ridge: alpha={alpha:.4e} (loo mse {:.5})", cv_errors[best]);

    let scaled = Mat::from_fn(r, c, |j, k| projected[(j, k)] / (lam[j] + alpha));
    let w = match &v {
        // dual coefficients U diag(1/(l+a)) U'y, mapped back with Z'
        None => z.transpose() * (&u * &scaled),
        Some(vmat) => vmat * &scaled,
    };

    Ok(TrainedClassifier {
        format_version: MODEL_FORMAT_VERSION,
        kind: ClassifierKind::Ridge,
        classes,
        weights: columns_as_rows(&w),
        intercepts: target_mean,
        scaler,
        hyperparameters: Hyperparameters::Ridge {
            alpha,
            alpha_grid: alphas.to_vec(),
            cv_errors,
        },
        converged: true,
        training_ref: None,
    })
}

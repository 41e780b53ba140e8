use faer::prelude::Solve;
use faer::{Mat, Side};

use super::{check_xy, class_ids, columns_as_rows, FeatureScaler, Hyperparameters, TrainedClassifier};
use super::{ClassifierKind, MODEL_FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Ledoit-Wolf shrinkage intensity toward a scaled identity for rows
/// that are already centred.
pub fn ledoit_wolf_shrinkage(centred: &Matrix) -> f64 {
    lw_faer(&centred.to_faer())
}

fn lw_faer(x: &Mat<f64>) -> f64 {
    let (n, p) = (x.nrows() as f64, x.ncols() as f64);
    let row_sq: Vec<f64> = (0..x.nrows())
        .map(|i| (0..x.ncols()).map(|j| x[(i, j)] * x[(i, j)]).sum())
        .collect();
    let mu = row_sq.iter().sum::<f64>() / (n * p);
    let beta_sum: f64 = row_sq.iter().map(|s| s * s).sum();
    // squared Frobenius norm of X'X equals that of XX'; use the smaller
    let gram = if x.nrows() <= x.ncols() { x * x.transpose() } else { x.transpose() * x };
    let frob: f64 = (0..gram.nrows())
        .flat_map(|i| (0..gram.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| gram[(i, j)] * gram[(i, j)])
        .sum();
    let delta_raw = frob / (n * n);
    let beta = ((beta_sum / n - delta_raw) / (p * n)).min((delta_raw - p * mu * mu) / p);
    let delta = (delta_raw - p * mu * mu) / p;
    if beta <= 0.0 || delta <= 0.0 {
        0.0
    } else {
        (beta / delta).clamp(0.0, 1.0)
    }
}

/// Linear discriminant analysis with covariance `(1-g) S + g (tr S / p) I`,
/// where S is the pooled within-class covariance. `shrinkage = None`
/// estimates g with Ledoit-Wolf.
pub fn fit_lda(x: &Matrix, y: &[usize], shrinkage: Option<f64>) -> Result<TrainedClassifier> {
    check_xy(x, y)?;
    if let Some(g) = shrinkage {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::Config(format!("lda shrinkage {g} outside [0, 1]")));
        }
    }
    let classes = class_ids(y)?;
    let (n, p, k) = (x.rows(), x.cols(), classes.len());
    let dof = n as isize - k as isize;
    if dof <= 0 {
        return Err(Error::Degenerate(format!("{n} samples for {k} classes leaves no within-class freedom")));
    }
    let dof = dof as f64;
    let scaler = FeatureScaler::fit(x);
    let mut z = scaler.transform_faer(x);

    let index_of = |label: usize| classes.binary_search(&label).expect("label from class set");
    let mut counts = vec![0usize; k];
    let mut means = Mat::<f64>::zeros(p, k);
    for i in 0..n {
        let c = index_of(y[i]);
        counts[c] += 1;
        for j in 0..p {
            means[(j, c)] += z[(i, j)];
        }
    }
    for c in 0..k {
        for j in 0..p {
            means[(j, c)] /= counts[c] as f64;
        }
    }
    for i in 0..n {
        let c = index_of(y[i]);
        for j in 0..p {
            z[(i, j)] -= means[(j, c)];
        }
    }

    let trace: f64 = (0..n).flat_map(|i| (0..p).map(move |j| (i, j))).map(|(i, j)| z[(i, j)] * z[(i, j)]).sum::<f64>() / dof;
    let nu = trace / p as f64;
    let (gamma, estimated) = match shrinkage {
        Some(g) => (g, false),
        None => (lw_faer(&z), true),
    };
    if gamma == 0.0 && p as f64 > dof {
        return Err(Error::Singular(format!(
            "unshrunk within-class covariance is singular ({p} features, {dof} degrees of freedom)"
        )));
    }
    if nu <= 0.0 {
        return Err(Error::Degenerate("within-class scatter is zero".into()));
    }

    let s = gamma * nu;
    let r = (1.0 - gamma) / dof;
    let w = if p <= n || s == 0.0 {
        let mut sigma = z.transpose() * &z;
        for a in 0..p {
            for b in 0..p {
                sigma[(a, b)] *= r;
            }
            sigma[(a, a)] += s;
        }
        let llt = sigma
            .llt(Side::Lower)
            .map_err(|e| Error::Singular(format!("covariance factorization failed: {e:?}")))?;
        llt.solve(&means)
    } else {
        // Woodbury: inverse of sI + r Z'Z through an n x n system
        let mut inner = &z * z.transpose();
        for a in 0..n {
            for b in 0..n {
                inner[(a, b)] *= r;
            }
            inner[(a, a)] += s;
        }
        let llt = inner
            .llt(Side::Lower)
            .map_err(|e| Error::Singular(format!("woodbury factorization failed: {e:?}")))?;
        let t = llt.solve(&z * &means);
        let correction = z.transpose() * &t;
        Mat::from_fn(p, k, |j, c| (means[(j, c)] - r * correction[(j, c)]) / s)
    };

    let intercepts = (0..k)
        .map(|c| {
            let quad: f64 = (0..p).map(|j| means[(j, c)] * w[(j, c)]).sum();
            -0.5 * quad + (counts[c] as f64 / n as f64).ln()
        })
        .collect();
    log::info!("lda: shrinkage={gamma:.4} ({})", if estimated { "ledoit-wolf" } else { "fixed" });

    Ok(TrainedClassifier {
        format_version: MODEL_FORMAT_VERSION,
        kind: ClassifierKind::Lda,
        classes,
        weights: columns_as_rows(&w),
        intercepts,
        scaler,
        hyperparameters: Hyperparameters::Lda { shrinkage: gamma, estimated },
        converged: true,
        training_ref: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize, p: usize) -> (Matrix, Vec<usize>) {
        let x = Matrix::from_fn(n, p, |i, j| ((i * 11 + j * 5) as f64 * 0.43).cos() + (i % 3) as f64 * ((j % 2) as f64));
        (x, (0..n).map(|i| i % 3).collect())
    }

    #[test]
    fn woodbury_matches_direct_solve() {
        // p > n with shrinkage forces the Woodbury branch; compare with a
        // dense p x p solve built independently here
        let (x, y) = data(15, 25);
        let m = fit_lda(&x, &y, Some(0.3)).unwrap();
        let z = m.scaler.transform_faer(&x);
        let mut zc = z.clone();
        let mut means = vec![vec![0.0; 25]; 3];
        for i in 0..15 {
            for j in 0..25 {
                means[y[i]][j] += z[(i, j)] / 5.0;
            }
        }
        for i in 0..15 {
            for j in 0..25 {
                zc[(i, j)] -= means[y[i]][j];
            }
        }
        let mut sigma = zc.transpose() * &zc;
        let tr: f64 = (0..25).map(|j| sigma[(j, j)]).sum::<f64>() / 12.0 / 25.0;
        for a in 0..25 {
            for b in 0..25 {
                sigma[(a, b)] *= 0.7 / 12.0;
            }
            sigma[(a, a)] += 0.3 * tr;
        }
        let lu = sigma.partial_piv_lu();
        for c in 0..3 {
            let rhs = Mat::from_fn(25, 1, |j, _| means[c][j]);
            let w = lu.solve(&rhs);
            for j in 0..25 {
                assert!((w[(j, 0)] - m.weights[c][j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn unshrunk_singular_is_an_error() {
        let (x, y) = data(10, 20);
        assert!(matches!(fit_lda(&x, &y, Some(0.0)), Err(Error::Singular(_))));
        assert!(fit_lda(&x, &y, None).is_ok());
    }

    #[test]
    fn shrinkage_estimate_in_unit_interval() {
        let (x, _) = data(40, 6);
        let g = ledoit_wolf_shrinkage(&x);
        assert!((0.0..=1.0).contains(&g));
    }
}

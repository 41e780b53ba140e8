//! Classifiers against dense reference solutions built with nalgebra.

use hsrocket::classify::{
    default_alpha_grid, fit_lda, fit_ridge, fit_svm, ledoit_wolf_shrinkage, Hyperparameters, SvmParams,
    TrainedClassifier,
};
use hsrocket::Matrix;
use nalgebra::{DMatrix, DVector};

fn dataset(n: usize, p: usize, classes: usize, seed: f64) -> (Matrix, Vec<usize>) {
    let y: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % classes).collect();
    let x = Matrix::from_fn(n, p, |i, j| {
        ((i as f64 + 1.0) * (j as f64 + seed) * 0.37).sin() + 0.8 * (y[i] as f64) * ((j % 3) as f64 - 1.0)
    });
    (x, y)
}

fn standardized(model: &TrainedClassifier, x: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(x.rows(), x.cols(), |i, j| (x.get(i, j) - model.scaler.mean[j]) / model.scaler.std[j])
}

/// Ridge with unpenalized intercept fitted on `rows` only.
fn ridge_solve(z: &DMatrix<f64>, t: &[f64], rows: &[usize], alpha: f64) -> (DVector<f64>, f64) {
    let p = z.ncols();
    let n = rows.len() as f64;
    let mut zm = DVector::zeros(p);
    let mut tm = 0.0;
    for &i in rows {
        zm += z.row(i).transpose();
        tm += t[i];
    }
    zm /= n;
    tm /= n;
    let zc = DMatrix::from_fn(rows.len(), p, |r, j| z[(rows[r], j)] - zm[j]);
    let tc = DVector::from_iterator(rows.len(), rows.iter().map(|&i| t[i] - tm));
    let a = zc.transpose() * &zc + DMatrix::identity(p, p) * alpha;
    let w = a.lu().solve(&(zc.transpose() * tc)).unwrap();
    let b = tm - zm.dot(&w);
    (w, b)
}

#[test]
fn ridge_loo_errors_match_explicit_refits() {
    for (n, p) in [(24, 5), (12, 30)] {
        let (x, y) = dataset(n, p, 3, 1.3);
        let model = fit_ridge(&x, &y, &default_alpha_grid()).unwrap();
        let z = standardized(&model, &x);
        let Hyperparameters::Ridge { alpha, alpha_grid, cv_errors } = &model.hyperparameters else {
            panic!("ridge hyperparameters expected")
        };
        for (a, reported) in alpha_grid.iter().zip(cv_errors) {
            let mut sse = 0.0;
            for class in &model.classes {
                let t: Vec<f64> = y.iter().map(|v| if v == class { 1.0 } else { -1.0 }).collect();
                for i in 0..n {
                    let rest: Vec<usize> = (0..n).filter(|&r| r != i).collect();
                    let (w, b) = ridge_solve(&z, &t, &rest, *a);
                    let pred = z.row(i).transpose().dot(&w) + b;
                    sse += (t[i] - pred).powi(2);
                }
            }
            let brute = sse / (n * model.classes.len()) as f64;
            assert!((brute - reported).abs() <= 1e-8 * brute.max(1.0), "n={n} alpha={a}: {brute} vs {reported}");
        }
        let all: Vec<usize> = (0..n).collect();
        for (k, class) in model.classes.iter().enumerate() {
            let t: Vec<f64> = y.iter().map(|v| if v == class { 1.0 } else { -1.0 }).collect();
            let (w, b) = ridge_solve(&z, &t, &all, *alpha);
            for j in 0..p {
                assert!((w[j] - model.weights[k][j]).abs() < 1e-8);
            }
            assert!((b - model.intercepts[k]).abs() < 1e-8);
        }
    }
}

/// Exact primal minimizer of 0.5|w|^2 + C sum max(0, 1 - y w.x)^2 with the
/// bias as a constant feature, by Newton steps with backtracking.
fn svm_primal_newton(z: &DMatrix<f64>, y: &[f64], c: f64) -> DVector<f64> {
    let (n, p) = (z.nrows(), z.ncols());
    let xa = DMatrix::from_fn(n, p + 1, |i, j| if j < p { z[(i, j)] } else { 1.0 });
    let objective = |w: &DVector<f64>| {
        let margins = &xa * w;
        0.5 * w.norm_squared() + c * (0..n).map(|i| (1.0 - y[i] * margins[i]).max(0.0).powi(2)).sum::<f64>()
    };
    let mut w = DVector::zeros(p + 1);
    for _ in 0..200 {
        let margins = &xa * &w;
        let mut grad = w.clone();
        let mut hess = DMatrix::identity(p + 1, p + 1);
        for i in 0..n {
            let slack = 1.0 - y[i] * margins[i];
            if slack > 0.0 {
                let xi = xa.row(i).transpose();
                grad -= &xi * (2.0 * c * y[i] * slack);
                hess += &xi * xi.transpose() * (2.0 * c);
            }
        }
        if grad.norm() < 1e-12 {
            break;
        }
        let step = hess.cholesky().unwrap().solve(&grad);
        let f0 = objective(&w);
        let mut t = 1.0;
        while objective(&(&w - &step * t)) > f0 && t > 1e-12 {
            t *= 0.5;
        }
        w -= step * t;
    }
    w
}

#[test]
fn svm_matches_primal_newton_solution() {
    let (x, y) = dataset(60, 5, 3, 0.7);
    let params = SvmParams { c: 0.5, tol: 1e-10, max_iter: 100_000, seed: 4 };
    let model = fit_svm(&x, &y, params).unwrap();
    assert!(model.converged);
    let z = standardized(&model, &x);
    for (k, class) in model.classes.iter().enumerate() {
        let signs: Vec<f64> = y.iter().map(|v| if v == class { 1.0 } else { -1.0 }).collect();
        let w = svm_primal_newton(&z, &signs, params.c);
        for j in 0..5 {
            assert!((w[j] - model.weights[k][j]).abs() < 1e-6, "class {class} w{j}: {} vs {}", w[j], model.weights[k][j]);
        }
        assert!((w[5] - model.intercepts[k]).abs() < 1e-6);
    }
}

fn lda_reference(model: &TrainedClassifier, x: &Matrix, y: &[usize], gamma: f64) -> (Vec<DVector<f64>>, Vec<f64>) {
    let z = standardized(model, x);
    let (n, p) = (z.nrows(), z.ncols());
    let classes = &model.classes;
    let means: Vec<DVector<f64>> = classes
        .iter()
        .map(|c| {
            let rows: Vec<usize> = (0..n).filter(|&i| y[i] == *c).collect();
            rows.iter().fold(DVector::zeros(p), |acc, &i| acc + z.row(i).transpose()) / rows.len() as f64
        })
        .collect();
    let mut scatter = DMatrix::zeros(p, p);
    for i in 0..n {
        let k = classes.iter().position(|c| *c == y[i]).unwrap();
        let d = z.row(i).transpose() - &means[k];
        scatter += &d * d.transpose();
    }
    let s = scatter / (n - classes.len()) as f64;
    let nu = s.trace() / p as f64;
    let sigma = &s * (1.0 - gamma) + DMatrix::identity(p, p) * (gamma * nu);
    let inv = sigma.try_inverse().unwrap();
    let weights: Vec<DVector<f64>> = means.iter().map(|m| &inv * m).collect();
    let intercepts = classes
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let prior = y.iter().filter(|v| *v == c).count() as f64 / n as f64;
            -0.5 * means[k].dot(&weights[k]) + prior.ln()
        })
        .collect();
    (weights, intercepts)
}

#[test]
fn lda_matches_dense_reference() {
    for (n, p, gamma) in [(40, 6, Some(0.2)), (40, 6, None), (15, 25, Some(0.4)), (15, 25, None)] {
        let (x, y) = dataset(n, p, 3, 2.1);
        let model = fit_lda(&x, &y, gamma).unwrap();
        let Hyperparameters::Lda { shrinkage, .. } = model.hyperparameters else { panic!() };
        let (w, b) = lda_reference(&model, &x, &y, shrinkage);
        for k in 0..3 {
            for j in 0..p {
                let scale = w[k].amax().max(1.0);
                assert!((w[k][j] - model.weights[k][j]).abs() < 1e-8 * scale, "n={n} p={p}");
            }
            assert!((b[k] - model.intercepts[k]).abs() < 1e-8 * b[k].abs().max(1.0));
        }
    }
}

// sklearn.covariance.ledoit_wolf_shrinkage(X, assume_centered=True)
#[test]
fn ledoit_wolf_matches_reference_values() {
    for (n, p, expected) in [(12, 5, 0.1728783874603645), (6, 9, 0.19961010701892692)] {
        let x = Matrix::from_fn(n, p, |i, j| (0.7 * i as f64 + 1.3 * j as f64).sin() + 0.01 * (i * j) as f64);
        let got = ledoit_wolf_shrinkage(&x);
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }
}

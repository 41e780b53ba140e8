//! Savitzky-Golay smoothing. Interior points use the centered window;
//! the first and last `window / 2` points are evaluated from a polynomial
//! fitted to the first / last `window` samples.

use faer::prelude::Solve;
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Least-squares weights that evaluate a degree-`order` polynomial, fitted
/// to `window` equally spaced samples, at sample position `at`.
fn weights(window: usize, order: usize, at: usize) -> Vec<f64> {
    let half = ((window - 1) / 2).max(1) as f64;
    let u = |k: usize| (k as f64 - (window - 1) as f64 / 2.0) / half;
    let vander = Mat::<f64>::from_fn(window, order + 1, |k, j| u(k).powi(j as i32));
    let gram = vander.transpose() * &vander;
    let llt = gram
        .llt(Side::Lower)
        .expect("Vandermonde Gram is positive definite for window > order");
    let proj = llt.solve(vander.transpose());
    let target = u(at);
    (0..window)
        .map(|k| (0..=order).map(|j| target.powi(j as i32) * proj[(j, k)]).sum())
        .collect()
}

fn validate(window: usize, order: usize) -> Result<()> {
    if window % 2 == 0 {
        return Err(Error::Config(format!("S-G window must be odd, got {window}")));
    }
    if window <= order {
        return Err(Error::Config(format!(
            "S-G window {window} must exceed polynomial order {order}"
        )));
    }
    Ok(())
}

/// Smooths `y`. A series shorter than `window` is smoothed with the
/// largest odd window that fits, if that window still exceeds `order`.
pub fn sg_smooth(y: &[f64], window: usize, order: usize) -> Result<Vec<f64>> {
    validate(window, order)?;
    let n = y.len();
    let mut window = window;
    if n < window {
        let reduced = if n % 2 == 1 { n } else { n.saturating_sub(1) };
        if reduced <= order {
            return Err(Error::Degenerate(format!(
                "series of length {n} too short for S-G order {order}"
            )));
        }
        log::warn!("S-G window {window} reduced to {reduced} for a series of length {n}");
        window = reduced;
    }
    let half = window / 2;
    let mut out = vec![0.0; n];

    let center = weights(window, order, half);
    for i in half..n - half {
        out[i] = dot(&center, &y[i - half..i + half + 1]);
    }
    for i in 0..half {
        out[i] = dot(&weights(window, order, i), &y[..window]);
        let j = n - half + i;
        out[j] = dot(&weights(window, order, half + 1 + i), &y[n - window..]);
    }
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

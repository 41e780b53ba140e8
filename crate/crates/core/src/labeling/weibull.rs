//! Fits health-index curves of the form `a - k * h(t; beta, eta)` where
//! `h(t; beta, eta) = (beta / eta) * (t / eta)^(beta - 1)` is the Weibull
//! hazard.
//!
//! `k` and `eta` only enter through `k * beta / eta^beta`, so the scale is
//! pinned to the horizon `eta = max(t)` and `(a, k, beta)` are estimated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;
/// Starting shapes for the multi-start search.
pub const SHAPE_STARTS: [f64; 8] = [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0];
pub const MAX_ITER: usize = 500;
pub const GRAD_TOL: f64 = 1e-8;
const LN_SHAPE_BOUNDS: (f64, f64) = (-3.0, 4.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub shape: f64,
    pub scale: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl WeibullParams {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset - self.amplitude * hazard(t, self.shape, self.scale)
    }
}

/// Weibull failure rate.
pub fn hazard(t: f64, shape: f64, scale: f64) -> f64 {
    (shape / scale) * (t / scale).powf(shape - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeibullFit {
    /// `None` when every start failed and `fitted` is the input copied.
    pub params: Option<WeibullParams>,
    pub fitted: Vec<f64>,
    pub sse: f64,
}

/// Linear least squares for `(a, k)` at a fixed shape.
fn linear_part(y: &[f64], h: &[f64]) -> Option<(f64, f64)> {
    let n = y.len() as f64;
    let (sh, sy) = (h.iter().sum::<f64>(), y.iter().sum::<f64>());
    let shh: f64 = h.iter().map(|v| v * v).sum();
    let shy: f64 = h.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * shh - sh * sh;
    if det.abs() <= 1e-12 * (n * shh).max(f64::MIN_POSITIVE) {
        return None;
    }
    // y ~ a + c h, k = -c
    let c = (n * shy - sh * sy) / det;
    let a = (sy - c * sh) / n;
    Some((a, -c))
}

struct Problem<'a> {
    y: &'a [f64],
    t: &'a [f64],
    scale: f64,
}

impl Problem<'_> {
    /// residuals y - f and Jacobian of f wrt (a, k, ln beta)
    fn eval(&self, p: &[f64; 3], r: &mut [f64], jac: &mut [[f64; 3]]) -> f64 {
        let (a, k, beta) = (p[0], p[1], p[2].exp());
        let mut sse = 0.0;
        for i in 0..self.y.len() {
            let s = self.t[i] / self.scale;
            let h = (beta / self.scale) * s.powf(beta - 1.0);
            let f = a - k * h;
            r[i] = self.y[i] - f;
            sse += r[i] * r[i];
            jac[i] = [1.0, -h, -k * h * (1.0 + beta * s.ln())];
        }
        sse
    }

    fn sse(&self, p: &[f64; 3]) -> f64 {
        let (a, k, beta) = (p[0], p[1], p[2].exp());
        self.y
            .iter()
            .zip(self.t)
            .map(|(&y, &t)| {
                let f = a - k * (beta / self.scale) * (t / self.scale).powf(beta - 1.0);
                (y - f) * (y - f)
            })
            .sum()
    }
}

/// Damped Gauss-Newton (Levenberg-Marquardt) from one start. Returns the
/// final parameters and SSE when the run converged.
fn levenberg_marquardt(prob: &Problem<'_>, start: [f64; 3]) -> Option<([f64; 3], f64)> {
    let n = prob.y.len();
    let mut p = start;
    let mut r = vec![0.0; n];
    let mut jac = vec![[0.0; 3]; n];
    let mut sse = prob.eval(&p, &mut r, &mut jac);
    let mut lambda = 1e-3;
    let y_scale = prob.y.iter().map(|v| v * v).sum::<f64>().max(1.0);

    for _ in 0..MAX_ITER {
        if !sse.is_finite() {
            return None;
        }
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (row, ri) in jac.iter().zip(&r) {
            for a in 0..3 {
                jtr[a] += row[a] * ri;
                for b in 0..3 {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let grad = jtr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if grad <= GRAD_TOL * y_scale.sqrt() || sse <= 1e-30 * y_scale {
            return Some((p, sse));
        }

        let mut improved = false;
        for _ in 0..40 {
            let mut lhs = jtj;
            for d in 0..3 {
                lhs[d][d] += lambda * jtj[d][d].max(1e-12);
            }
            let Some(step) = solve3(lhs, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let mut cand = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
            cand[2] = cand[2].clamp(LN_SHAPE_BOUNDS.0, LN_SHAPE_BOUNDS.1);
            let cand_sse = prob.sse(&cand);
            if cand_sse.is_finite() && cand_sse < sse {
                let rel_step = step
                    .iter()
                    .zip(&p)
                    .fold(0.0f64, |m, (s, v)| m.max(s.abs() / (v.abs() + 1e-8)));
                let rel_drop = (sse - cand_sse) / sse.max(f64::MIN_POSITIVE);
                p = cand;
                sse = prob.eval(&p, &mut r, &mut jac);
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel_step < 1e-12 || rel_drop < 1e-15 {
                    return Some((p, sse));
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
        }
        if !improved {
            // no descent direction left at machine precision
            return Some((p, sse));
        }
    }
    None
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Multi-start least-squares fit of `hi` against cycle times `t`.
pub fn fit_weibull_curve(hi: &[f64], t: &[f64]) -> Result<WeibullFit> {
    if hi.len() != t.len() {
        return Err(Error::Shape(format!(
            "{} values against {} time points",
            hi.len(),
            t.len()
        )));
    }
    if hi.len() < MIN_POINTS {
        return Err(Error::Degenerate(format!(
            "Weibull fit needs at least {MIN_POINTS} points, got {}",
            hi.len()
        )));
    }
    if t.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Config("Weibull time points must be positive".into()));
    }
    let scale = t.iter().cloned().fold(0.0, f64::max);
    let prob = Problem { y: hi, t, scale };

    let mut best: Option<([f64; 3], f64)> = None;
    for &shape in &SHAPE_STARTS {
        let h: Vec<f64> = t.iter().map(|&v| hazard(v, shape, scale)).collect();
        let (a, k) = linear_part(hi, &h).unwrap_or((hi.iter().sum::<f64>() / hi.len() as f64, 0.0));
        if let Some((p, sse)) = levenberg_marquardt(&prob, [a, k, shape.ln()]) {
            if best.map_or(true, |(_, b)| sse < b) {
                best = Some((p, sse));
            }
        }
    }

    match best {
        Some((p, sse)) => {
            let params = WeibullParams {
                shape: p[2].exp(),
                scale,
                amplitude: p[1],
                offset: p[0],
            };
            Ok(WeibullFit {
                params: Some(params),
                fitted: t.iter().map(|&v| params.eval(v)).collect(),
                sse,
            })
        }
        None => {
            log::warn!("Weibull fit did not converge from any start; keeping smoothed curve");
            Ok(WeibullFit {
                params: None,
                fitted: hi.to_vec(),
                sse: 0.0,
            })
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classification quality for one prediction run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    /// `confusion[t][p]` counts samples of true class t predicted as p.
    pub confusion: Vec<Vec<usize>>,
}

/// Accuracy and macro-F1 over all `classes` classes. Per-class precision,
/// recall and F1 are 0 whenever their denominator is 0, so a class absent
/// from both truth and prediction still pulls the macro average down.
pub fn compute_metrics(truth: &[usize], predicted: &[usize], classes: usize) -> Result<Metrics> {
    if truth.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "{} true labels against {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Degenerate("no labels to score".into()));
    }
    if let Some(bad) = truth.iter().chain(predicted).find(|&&l| l >= classes) {
        return Err(Error::Config(format!("label {bad} outside 0..{classes}")));
    }

    let mut confusion = vec![vec![0usize; classes]; classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        confusion[t][p] += 1;
    }
    let correct: usize = (0..classes).map(|k| confusion[k][k]).sum();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };

    let mut precision = Vec::with_capacity(classes);
    let mut recall = Vec::with_capacity(classes);
    let mut f1 = Vec::with_capacity(classes);
    for k in 0..classes {
        let tp = confusion[k][k];
        let predicted_k: usize = (0..classes).map(|t| confusion[t][k]).sum();
        let actual_k: usize = confusion[k].iter().sum();
        let p = ratio(tp, predicted_k);
        let r = ratio(tp, actual_k);
        precision.push(p);
        recall.push(r);
        f1.push(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) });
    }
    Ok(Metrics {
        accuracy: ratio(correct, truth.len()),
        macro_f1: f1.iter().sum::<f64>() / classes as f64,
        precision,
        recall,
        f1,
        confusion,
    })
}

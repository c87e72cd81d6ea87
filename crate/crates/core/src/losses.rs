//! Loss functions: mean squared error, softmax cross-entropy, and the Cox
//! negative log partial likelihood for right-censored survival data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Right-censored survival observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalTarget {
    pub time: f64,
    /// true = event observed, false = censored.
    pub event: bool,
}

impl SurvivalTarget {
    pub fn new(time: f64, event: bool) -> Result<Self> {
        if !(time > 0.0) || !time.is_finite() {
            return Err(Error::Domain(format!("survival time must be > 0, got {time}")));
        }
        Ok(Self { time, event })
    }
}

/// Targets of the three supported tasks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Targets {
    Real(Vec<f64>),
    Class(Vec<usize>),
    Survival(Vec<SurvivalTarget>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Real(v) => v.len(),
            Targets::Class(v) => v.len(),
            Targets::Survival(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn gather(&self, idx: &[usize]) -> Targets {
        match self {
            Targets::Real(v) => Targets::Real(idx.iter().map(|&i| v[i]).collect()),
            Targets::Class(v) => Targets::Class(idx.iter().map(|&i| v[i]).collect()),
            Targets::Survival(v) => Targets::Survival(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    CrossEntropy,
    Cox,
}

/// Mean of squared residuals and its gradient 2(pred - target)/N.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::Shape(format!(
            "mse lengths {} vs {}",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Degenerate("mse on empty input".into()));
    }
    let n = pred.len() as f64;
    let mut value = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let r = p - t;
            value += r * r;
            2.0 * r / n
        })
        .collect();
    Ok((value / n, grad))
}

/// Mean softmax cross-entropy over rows of `logits` (N x C); the binary case
/// is the two-class softmax. Gradient is (softmax - onehot)/N.
pub fn cross_entropy(logits: &Matrix, labels: &[usize], n_classes: usize) -> Result<(f64, Matrix)> {
    if logits.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "cross_entropy rows {} vs labels {}",
            logits.rows(),
            labels.len()
        )));
    }
    if logits.cols() != n_classes {
        return Err(Error::Shape(format!(
            "cross_entropy logit width {} vs {} classes",
            logits.cols(),
            n_classes
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::Domain(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    let n = labels.len() as f64;
    let mut value = 0.0;
    let mut grad = Matrix::zeros(logits.rows(), n_classes);
    for (i, &label) in labels.iter().enumerate() {
        let row = logits.row(i);
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|&v| (v - m).exp()).collect();
        let z: f64 = exps.iter().sum();
        value += z.ln() + m - row[label];
        let g = grad.row_mut(i);
        for (c, &e) in exps.iter().enumerate() {
            g[c] = (e / z - if c == label { 1.0 } else { 0.0 }) / n;
        }
    }
    Ok((value / n, grad))
}

/// Negative log partial likelihood of the Cox proportional hazards model.
///
/// For each observed event i the risk set is {j : T_j >= T_i}; tied event
/// times share their risk set (Breslow). The log-sum-exp over each risk set
/// is max-shifted, and the suffix structure of sorted times makes one pass
/// suffice. Returns the exact gradient in the scores.
pub fn cox_nll(scores: &[f64], targets: &[SurvivalTarget]) -> Result<(f64, Vec<f64>)> {
    if scores.len() != targets.len() {
        return Err(Error::Shape(format!(
            "cox lengths {} vs {}",
            scores.len(),
            targets.len()
        )));
    }
    let n = scores.len();
    if !targets.iter().any(|t| t.event) {
        return Err(Error::Degenerate("cox likelihood needs at least one observed event".into()));
    }
    // Sort by ascending time; group ties so they share a risk set.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| targets[a].time.partial_cmp(&targets[b].time).unwrap());

    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = order.iter().map(|&i| (scores[i] - m).exp()).collect();

    // suffix[k] = sum of w over sorted positions k..n
    let mut suffix = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] + w[k];
    }
    // group_start[k] = first sorted position with the same time as position k
    let mut group_start = vec![0usize; n];
    for k in 1..n {
        group_start[k] = if targets[order[k]].time == targets[order[k - 1]].time {
            group_start[k - 1]
        } else {
            k
        };
    }

    let mut value = 0.0;
    // inv_risk[k] accumulates sum over events i with group_start(i) == k of
    // 1 / suffix[group_start(i)], used for the gradient prefix below.
    let mut inv_risk = vec![0.0; n];
    for k in 0..n {
        let i = order[k];
        if targets[i].event {
            let gs = group_start[k];
            value += suffix[gs].ln() + m - scores[i];
            inv_risk[gs] += 1.0 / suffix[gs];
        }
    }
    // prefix[k] = sum of inv_risk over positions <= k: every subject at
    // sorted position k belongs to the risk sets of all events whose group
    // starts at or before k.
    let mut grad = vec![0.0; n];
    let mut running = 0.0;
    for k in 0..n {
        running += inv_risk[k];
        let i = order[k];
        grad[i] = w[k] * running - if targets[i].event { 1.0 } else { 0.0 };
    }
    Ok((value, grad))
}

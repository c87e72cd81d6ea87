//! Parameter updates and the training loop: minibatch SGD/Adam on
//! `loss + lambda * (1/D) * reg` with one fresh gate draw per batch.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates;
use crate::losses::{self, LossKind, Targets};
use crate::matrix::Matrix;
use crate::net::{GradientBundle, Network};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum OptKind {
    Sgd,
    Adam,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Training hyperparameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub lambda: f64,
    pub lr: f64,
    pub optimizer: OptKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Features with deterministic gate value strictly above this cutoff
    /// count as selected.
    pub gate_cutoff: f64,
    /// Early stopping patience on validation loss, in epochs.
    pub early_stop_patience: Option<usize>,
    /// Monte Carlo gate draws per minibatch.
    pub k_samples: usize,
    /// Draw one gate vector per example instead of one per batch.
    pub per_example_gates: bool,
    /// Deterministic-gate snapshot cadence; `None` picks every epoch for
    /// D <= 1024 and every 10 epochs above that.
    pub snapshot_every: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Mse,
            lambda: 1.0,
            lr: 0.1,
            optimizer: OptKind::Sgd,
            epochs: 100,
            batch_size: usize::MAX,
            seed: 0,
            gate_cutoff: 0.0,
            early_stop_patience: None,
            k_samples: 1,
            per_example_gates: false,
            snapshot_every: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, n_train: usize) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::Domain(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.lr > 0.0) {
            return Err(Error::Domain(format!("learning rate must be > 0, got {}", self.lr)));
        }
        if self.epochs < 1 {
            return Err(Error::Domain("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Domain("batch size must be >= 1".into()));
        }
        if self.k_samples < 1 {
            return Err(Error::Domain("k_samples must be >= 1".into()));
        }
        if n_train == 0 {
            return Err(Error::Degenerate("no training rows".into()));
        }
        Ok(())
    }
}

/// Deterministic-gate snapshot taken during training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSnapshot {
    pub epoch: usize,
    pub z: Vec<f64>,
}

/// Per-epoch training record.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub train_loss: Vec<f64>,
    pub valid_loss: Vec<Option<f64>>,
    /// Regularizer value (1/D) * sum of open-gate probabilities, before lambda.
    pub reg_value: Vec<f64>,
    pub open_gates: Vec<usize>,
    pub snapshots: Vec<GateSnapshot>,
}

impl TrainTrace {
    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }

    /// CSV with columns epoch, train_loss, valid_loss, reg_value, open_gates.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("epoch,train_loss,valid_loss,reg_value,open_gates\n");
        for e in 0..self.epochs() {
            let valid = self.valid_loss[e]
                .map(|v| v.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e + 1,
                self.train_loss[e],
                valid,
                self.reg_value[e],
                self.open_gates[e]
            ));
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(out.as_bytes())?;
        Ok(())
    }
}

/// p <- p - lr * g, elementwise.
pub fn sgd_step(params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::Shape(format!(
            "sgd lengths {} vs {}",
            params.len(),
            grads.len()
        )));
    }
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= lr * g;
    }
    Ok(())
}

/// First/second moment state for Adam.
#[derive(Clone, Debug, Default)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// Standard Adam update with bias correction. `state.t` counts the steps
/// already taken; callers advance it once per batch across all parameter
/// groups.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [f64],
    grads: &[f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    if params.len() != grads.len() || state.m.len() != params.len() {
        return Err(Error::Shape("adam lengths differ".into()));
    }
    let t = state.t as f64;
    let bc1 = 1.0 - beta1.powf(t);
    let bc2 = 1.0 - beta2.powf(t);
    for i in 0..params.len() {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// Optimizer state mirroring a network's parameter groups.
enum Optimizer {
    Sgd,
    Adam {
        weights: Vec<AdamState>,
        biases: Vec<AdamState>,
        mu: AdamState,
        step: u64,
    },
}

impl Optimizer {
    fn new(kind: OptKind, net: &Network) -> Self {
        match kind {
            OptKind::Sgd => Optimizer::Sgd,
            OptKind::Adam => Optimizer::Adam {
                weights: net
                    .layers
                    .iter()
                    .map(|l| AdamState::new(l.weight.data().len()))
                    .collect(),
                biases: net.layers.iter().map(|l| AdamState::new(l.bias.len())).collect(),
                mu: AdamState::new(net.gate.dim()),
                step: 0,
            },
        }
    }

    fn apply(&mut self, net: &mut Network, g: &GradientBundle, lr: f64) -> Result<()> {
        match self {
            Optimizer::Sgd => {
                for (l, dw) in net.layers.iter_mut().zip(&g.d_weights) {
                    sgd_step(l.weight.data_mut(), dw.data(), lr)?;
                }
                for (l, db) in net.layers.iter_mut().zip(&g.d_biases) {
                    sgd_step(&mut l.bias, db, lr)?;
                }
                sgd_step(&mut net.gate.mu, &g.d_mu, lr)?;
            }
            Optimizer::Adam {
                weights,
                biases,
                mu,
                step,
            } => {
                *step += 1;
                for ((l, dw), st) in net.layers.iter_mut().zip(&g.d_weights).zip(weights.iter_mut()) {
                    st.t = *step;
                    adam_step(st, l.weight.data_mut(), dw.data(), lr, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)?;
                }
                for ((l, db), st) in net.layers.iter_mut().zip(&g.d_biases).zip(biases.iter_mut()) {
                    st.t = *step;
                    adam_step(st, &mut l.bias, db, lr, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)?;
                }
                mu.t = *step;
                adam_step(mu, &mut net.gate.mu, &g.d_mu, lr, ADAM_BETA1, ADAM_BETA2, ADAM_EPS)?;
            }
        }
        Ok(())
    }
}

/// Train/validation views of a dataset.
pub struct TrainData<'a> {
    pub train_x: &'a Matrix,
    pub train_y: &'a Targets,
    pub valid_x: Option<&'a Matrix>,
    pub valid_y: Option<&'a Targets>,
}

fn loss_on(kind: LossKind, preds: &Matrix, targets: &Targets) -> Result<(f64, Matrix)> {
    match (kind, targets) {
        (LossKind::Mse, Targets::Real(y)) => {
            let (v, g) = losses::mse(&preds.column(0), y)?;
            Ok((v, Matrix::new(preds.rows(), 1, g)?))
        }
        (LossKind::CrossEntropy, Targets::Class(y)) => losses::cross_entropy(preds, y, preds.cols()),
        (LossKind::Cox, Targets::Survival(y)) => {
            let (v, g) = losses::cox_nll(&preds.column(0), y)?;
            Ok((v, Matrix::new(preds.rows(), 1, g)?))
        }
        _ => Err(Error::Usage("loss kind does not match target kind".into())),
    }
}

/// Evaluation-mode data loss (no regularizer), used for validation.
pub fn eval_loss(net: &Network, kind: LossKind, x: &Matrix, y: &Targets) -> Result<f64> {
    let preds = net.forward_eval(x)?;
    Ok(loss_on(kind, &preds, y)?.0)
}

/// Runs the training loop and returns the trained network with its trace.
///
/// Every epoch reshuffles the minibatch order from the run stream, draws a
/// fresh gate sample per batch (K per batch when configured), steps the
/// optimizer on `loss + lambda * (1/D) * reg`, and records the trace. A
/// non-finite loss aborts with a divergence error naming the epoch. With
/// early stopping, the best-validation-loss checkpoint is returned.
pub fn train(mut net: Network, data: &TrainData, cfg: &TrainConfig) -> Result<(Network, TrainTrace)> {
    let n = data.train_x.rows();
    cfg.validate(n)?;
    if data.train_y.len() != n {
        return Err(Error::Shape("targets do not match training rows".into()));
    }
    let batch = cfg.batch_size.min(n);
    let snapshot_every = cfg
        .snapshot_every
        .unwrap_or(if net.gate.dim() <= 1024 { 1 } else { 10 });

    let mut rng = Rng::new(cfg.seed);
    let mut opt = Optimizer::new(cfg.optimizer, &net);
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = TrainTrace::default();
    let mut best: Option<(f64, Network)> = None;
    let mut since_best = 0usize;

    for epoch in 1..=cfg.epochs {
        rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(batch) {
            let xb = data.train_x.gather_rows(chunk);
            let yb = data.train_y.gather(chunk);
            let mut acc = GradientBundle::zeros_like(&net);
            let mut batch_loss = 0.0;
            for _ in 0..cfg.k_samples {
                let (preds, cache) = net.forward_train(&xb, &mut rng, cfg.per_example_gates)?;
                let (lv, d_pred) = loss_on(cfg.loss, &preds, &yb)?;
                let g = net.backward(&cache, &d_pred, cfg.lambda)?;
                acc.add_scaled(&g, 1.0)?;
                batch_loss += lv;
            }
            let k = cfg.k_samples as f64;
            acc.scale(1.0 / k);
            batch_loss /= k;
            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    value: batch_loss,
                });
            }
            opt.apply(&mut net, &acc, cfg.lr)?;
            epoch_loss += batch_loss;
            batches += 1;
        }

        let (reg_sum, _) = gates::gate_reg(&net.gate)?;
        let zhat = net.eval_gate();
        let open = zhat.iter().filter(|&&z| z > cfg.gate_cutoff).count();
        trace.train_loss.push(epoch_loss / batches as f64);
        trace.reg_value.push(reg_sum / net.gate.dim() as f64);
        trace.open_gates.push(open);
        if epoch % snapshot_every == 0 || epoch == cfg.epochs {
            trace.snapshots.push(GateSnapshot { epoch, z: zhat });
        }

        let valid = match (data.valid_x, data.valid_y) {
            (Some(vx), Some(vy)) if vx.rows() > 0 => Some(eval_loss(&net, cfg.loss, vx, vy)?),
            _ => None,
        };
        trace.valid_loss.push(valid);

        if let Some(v) = valid {
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, net.clone()));
                since_best = 0;
            } else {
                since_best += 1;
            }
            if let Some(patience) = cfg.early_stop_patience {
                if since_best >= patience {
                    break;
                }
            }
        }
    }

    if cfg.early_stop_patience.is_some() {
        if let Some((_, best_net)) = best {
            net = best_net;
        }
    }
    Ok((net, trace))
}

/// A close/reopen episode of one gate during training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondChanceEvent {
    pub feature: usize,
    pub close_epoch: usize,
    pub reopen_epoch: usize,
}

/// Scans deterministic-gate snapshots for gates that reached exactly zero
/// and later reopened. Consecutive zero snapshots collapse into one episode.
pub fn second_chance_probe(snapshots: &[GateSnapshot]) -> Vec<SecondChanceEvent> {
    let mut events = Vec::new();
    let Some(first) = snapshots.first() else {
        return events;
    };
    let d = first.z.len();
    for feature in 0..d {
        let mut closed_at: Option<usize> = None;
        for snap in snapshots {
            let z = snap.z[feature];
            if z == 0.0 {
                if closed_at.is_none() {
                    closed_at = Some(snap.epoch);
                }
            } else if let Some(close_epoch) = closed_at.take() {
                events.push(SecondChanceEvent {
                    feature,
                    close_epoch,
                    reopen_epoch: snap.epoch,
                });
            }
        }
    }
    events.sort_by_key(|e| (e.feature, e.close_epoch));
    events
}

//! Feedforward network with a gated input layer: forward, exact reverse-mode
//! backward, parameter initialization, and a versioned JSON checkpoint.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{self, GateKind, GateLayer, GateSample};
use crate::matrix::Matrix;
use crate::rng::Rng;

const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
const SELU_ALPHA: f64 = 1.673_263_242_354_377_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Tanh,
    Relu,
    Sigmoid,
    Selu,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => crate::special::sigmoid(x),
            Activation::Selu => {
                if x > 0.0 {
                    SELU_LAMBDA * x
                } else {
                    SELU_LAMBDA * SELU_ALPHA * (x.exp() - 1.0)
                }
            }
        }
    }

    /// Derivative as a function of the pre-activation value.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = crate::special::sigmoid(x);
                s * (1.0 - s)
            }
            Activation::Selu => {
                if x > 0.0 {
                    SELU_LAMBDA
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp()
                }
            }
        }
    }
}

/// One dense layer; `weight` is out x in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub act: Activation,
}

/// Gated feedforward model: inputs pass through the gate layer, then the
/// dense stack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<DenseLayer>,
    pub gate: GateLayer,
}

/// Architecture description used by [`init`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetSpec {
    pub input_dim: usize,
    /// Hidden layers as (width, activation).
    pub hidden: Vec<(usize, Activation)>,
    pub output_dim: usize,
}

/// Gradients mirroring a [`Network`]'s parameters.
#[derive(Clone, Debug)]
pub struct GradientBundle {
    pub d_weights: Vec<Matrix>,
    pub d_biases: Vec<Vec<f64>>,
    pub d_mu: Vec<f64>,
}

impl GradientBundle {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            d_weights: net
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.weight.rows(), l.weight.cols()))
                .collect(),
            d_biases: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
            d_mu: vec![0.0; net.gate.dim()],
        }
    }

    pub fn add_scaled(&mut self, other: &GradientBundle, s: f64) -> Result<()> {
        for (a, b) in self.d_weights.iter_mut().zip(&other.d_weights) {
            a.add_scaled_in_place(b, s)?;
        }
        for (a, b) in self.d_biases.iter_mut().zip(&other.d_biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
        for (x, y) in self.d_mu.iter_mut().zip(&other.d_mu) {
            *x += s * y;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for w in &mut self.d_weights {
            w.scale_in_place(s);
        }
        for b in &mut self.d_biases {
            for x in b.iter_mut() {
                *x *= s;
            }
        }
        for x in &mut self.d_mu {
            *x *= s;
        }
    }
}

/// Standard deviation of the weight initialization draw.
pub const INIT_WEIGHT_STD: f64 = 0.1;

/// Fresh network: weights from N(0, 0.1^2), biases zero, gates at their
/// initial value.
pub fn init(spec: &NetSpec, gate_kind: GateKind, sigma: f64, rng: &mut Rng) -> Result<Network> {
    if spec.input_dim == 0 || spec.output_dim == 0 {
        return Err(Error::Domain("network needs positive widths".into()));
    }
    let gate = GateLayer::new(gate_kind, spec.input_dim, sigma)?;
    let mut layers = Vec::new();
    let mut in_dim = spec.input_dim;
    for &(width, act) in &spec.hidden {
        layers.push(dense_init(width, in_dim, act, rng)?);
        in_dim = width;
    }
    layers.push(dense_init(spec.output_dim, in_dim, Activation::Identity, rng)?);
    Ok(Network { layers, gate })
}

fn dense_init(out: usize, inp: usize, act: Activation, rng: &mut Rng) -> Result<DenseLayer> {
    if out == 0 || inp == 0 {
        return Err(Error::Domain("dense layer needs positive widths".into()));
    }
    let data: Vec<f64> = (0..out * inp)
        .map(|_| INIT_WEIGHT_STD * rng.standard_gaussian())
        .collect();
    Ok(DenseLayer {
        weight: Matrix::from_raw(out, inp, data),
        bias: vec![0.0; out],
        act,
    })
}

/// State retained by a training-mode forward pass for the backward pass.
pub struct ForwardCache {
    x: Matrix,
    gate_rows: Matrix,
    per_example: bool,
    sample: GateSample,
    pre: Vec<Matrix>,
    post: Vec<Matrix>,
}

impl ForwardCache {
    pub fn sample(&self) -> &GateSample {
        &self.sample
    }
}

impl Network {
    pub fn input_dim(&self) -> usize {
        self.gate.dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(|l| l.weight.rows()).unwrap_or(0)
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} columns, network expects {}",
                x.cols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Training-mode forward: multiplies the batch by a fresh gate draw
    /// (one shared draw per batch, or one per example) and runs the stack.
    pub fn forward_train(
        &self,
        x: &Matrix,
        rng: &mut Rng,
        per_example: bool,
    ) -> Result<(Matrix, ForwardCache)> {
        self.check_input(x)?;
        let (gated, gate_rows, sample) = if per_example {
            let mut rows = Matrix::zeros(x.rows(), x.cols());
            let mut first = GateSample {
                z: vec![0.0; self.gate.dim()],
                eps: vec![0.0; self.gate.dim()],
            };
            for r in 0..x.rows() {
                let s = gates::train_sample(&self.gate, rng)?;
                rows.row_mut(r).copy_from_slice(&s.z);
                if r == 0 {
                    first = s;
                }
            }
            (x.zip_map(&rows, |a, b| a * b)?, rows, first)
        } else {
            let s = gates::train_sample(&self.gate, rng)?;
            let gated = x.scale_rows_by(&s.z)?;
            let mut rows = Matrix::zeros(x.rows(), x.cols());
            for r in 0..x.rows() {
                rows.row_mut(r).copy_from_slice(&s.z);
            }
            (gated, rows, s)
        };
        let (preds, pre, post) = self.run_stack(&gated)?;
        Ok((
            preds,
            ForwardCache {
                x: x.clone(),
                gate_rows,
                per_example,
                sample,
                pre,
                post,
            },
        ))
    }

    /// Evaluation-mode forward with the deterministic gate; two calls give
    /// identical outputs.
    pub fn forward_eval(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let gated = x.scale_rows_by(&gates::eval_gate(&self.gate))?;
        Ok(self.run_stack(&gated)?.0)
    }

    /// Deterministic gate values (the feature weights of a trained model).
    pub fn eval_gate(&self) -> Vec<f64> {
        gates::eval_gate(&self.gate)
    }

    fn run_stack(&self, input: &Matrix) -> Result<(Matrix, Vec<Matrix>, Vec<Matrix>)> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        let mut cur = input.clone();
        for layer in &self.layers {
            let mut z = cur.matmul_transpose_b(&layer.weight)?;
            for r in 0..z.rows() {
                for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
                    *v += b;
                }
            }
            let a = z.map(|v| layer.act.apply(v));
            pre.push(z);
            post.push(a.clone());
            cur = a;
        }
        Ok((cur, pre, post))
    }

    /// Exact gradients of `loss + lambda * (1/D) * reg` given the upstream
    /// loss gradient `d_pred` (same shape as the predictions). The loss part
    /// flows through the stored gate sample; the regularizer part comes from
    /// the closed-form gate penalty.
    pub fn backward(&self, cache: &ForwardCache, d_pred: &Matrix, lambda: f64) -> Result<GradientBundle> {
        let n_layers = self.layers.len();
        if d_pred.rows() != cache.x.rows() || d_pred.cols() != self.output_dim() {
            return Err(Error::Shape("d_pred shape does not match the forward pass".into()));
        }
        let mut d_weights = vec![Matrix::zeros(0, 0); n_layers];
        let mut d_biases: Vec<Vec<f64>> = vec![Vec::new(); n_layers];

        let gated = cache.x.zip_map(&cache.gate_rows, |a, b| a * b)?;
        let mut delta = d_pred.clone();
        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            // delta through the activation
            delta = delta.zip_map(&cache.pre[l], |d, z| d * layer.act.derivative(z))?;
            let below = if l == 0 { &gated } else { &cache.post[l - 1] };
            d_weights[l] = delta.matmul_transpose_a(below)?;
            d_biases[l] = (0..layer.weight.rows())
                .map(|c| delta.column(c).iter().sum())
                .collect();
            if l > 0 {
                delta = delta.matmul(&layer.weight)?;
            }
        }
        // Gradient at the gated input.
        let d_gated = delta.matmul(&self.layers[0].weight)?;

        // Chain into the gate parameters: dL/dz_d = sum_i d_gated[i][d] * x[i][d]
        // for a shared draw; per-example draws keep the indicator per row.
        let d = self.gate.dim();
        let mut d_mu = vec![0.0; d];
        if cache.per_example {
            for r in 0..cache.x.rows() {
                let up: Vec<f64> = cache
                    .x
                    .row(r)
                    .iter()
                    .zip(d_gated.row(r))
                    .map(|(&xv, &g)| g * xv)
                    .collect();
                let row_sample = GateSample {
                    z: cache.gate_rows.row(r).to_vec(),
                    eps: vec![0.0; d],
                };
                let g = gates::gate_param_grad(&self.gate, &row_sample, &up)?;
                for (a, b) in d_mu.iter_mut().zip(&g) {
                    *a += b;
                }
            }
        } else {
            let mut up = vec![0.0; d];
            for r in 0..cache.x.rows() {
                for (u, (&xv, &g)) in up.iter_mut().zip(cache.x.row(r).iter().zip(d_gated.row(r))) {
                    *u += g * xv;
                }
            }
            d_mu = gates::gate_param_grad(&self.gate, &cache.sample, &up)?;
        }

        if lambda != 0.0 {
            let (_, reg_grad) = gates::gate_reg(&self.gate)?;
            let scale = lambda / d as f64;
            for (m, g) in d_mu.iter_mut().zip(&reg_grad) {
                *m += scale * g;
            }
        }

        Ok(GradientBundle {
            d_weights,
            d_biases,
            d_mu,
        })
    }

    /// Writes the versioned JSON checkpoint (shapes, weights, biases, gate
    /// parameters, gate kind).
    pub fn save(&self, path: &Path) -> Result<()> {
        let doc = Checkpoint {
            version: CHECKPOINT_VERSION,
            network: self.clone(),
        };
        let text = serde_json::to_string(&doc).map_err(|e| Error::Serde(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Network> {
        let text = std::fs::read_to_string(path)?;
        let doc: Checkpoint =
            serde_json::from_str(&text).map_err(|e| Error::Serde(e.to_string()))?;
        if doc.version != CHECKPOINT_VERSION {
            return Err(Error::Serde(format!(
                "unsupported checkpoint version {}",
                doc.version
            )));
        }
        Ok(doc.network)
    }
}

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    network: Network,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::HcParams;

    fn linear_net(weights: Vec<f64>, gate_mu: Vec<f64>) -> Network {
        let d = gate_mu.len();
        Network {
            layers: vec![DenseLayer {
                weight: Matrix::new(1, d, weights).unwrap(),
                bias: vec![0.0],
                act: Activation::Identity,
            }],
            gate: GateLayer::with_mu(GateKind::Stg, gate_mu, 0.5, HcParams::default()).unwrap(),
        }
    }

    #[test]
    fn gated_dot_product() {
        // theta = [1, 2], z = [1, 0] (mu = [5, -5] makes the draw saturate),
        // x = [3, 4] -> prediction 3.
        let net = linear_net(vec![1.0, 2.0], vec![5.0, -5.0]);
        let x = Matrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        let (preds, _) = net.forward_train(&x, &mut Rng::new(0), false).unwrap();
        assert!((preds.get(0, 0) - 3.0).abs() < 1e-12);
        let ev = net.forward_eval(&x).unwrap();
        assert!((ev.get(0, 0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_ones_gate_equals_ungated() {
        let mut rng = Rng::new(4);
        let spec = NetSpec {
            input_dim: 3,
            hidden: vec![(4, Activation::Tanh)],
            output_dim: 2,
        };
        let mut net = init(&spec, GateKind::Stg, 0.5, &mut rng).unwrap();
        for m in &mut net.gate.mu {
            *m = 5.0; // test gate clips to exactly 1
        }
        let x = Matrix::from_rows(&[vec![0.3, -1.0, 0.7], vec![1.5, 0.2, -0.4]]).unwrap();
        let gated = net.forward_eval(&x).unwrap();
        let direct = net.run_stack(&x).unwrap().0;
        for (a, b) in gated.iter().zip(direct.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn all_zero_gate_odd_activations_zero_output() {
        let mut rng = Rng::new(4);
        let spec = NetSpec {
            input_dim: 3,
            hidden: vec![(4, Activation::Tanh)],
            output_dim: 1,
        };
        let mut net = init(&spec, GateKind::Stg, 0.5, &mut rng).unwrap();
        for m in &mut net.gate.mu {
            *m = -5.0;
        }
        let x = Matrix::from_rows(&[vec![0.3, -1.0, 0.7]]).unwrap();
        let out = net.forward_eval(&x).unwrap();
        assert_eq!(out.get(0, 0), 0.0);
    }

    #[test]
    fn init_contract() {
        let mut rng = Rng::new(7);
        let spec = NetSpec {
            input_dim: 10,
            hidden: vec![(100, Activation::Relu), (100, Activation::Selu)],
            output_dim: 1,
        };
        let net = init(&spec, GateKind::Stg, 0.5, &mut rng).unwrap();
        assert!(net.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        assert!(net.gate.mu.iter().all(|&m| m == 0.5));
        // Sample std of the weight draws should sit near 0.1.
        let all: Vec<f64> = net
            .layers
            .iter()
            .flat_map(|l| l.weight.iter().cloned())
            .collect();
        let n = all.len() as f64;
        let mean: f64 = all.iter().sum::<f64>() / n;
        let var: f64 = all.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        // std of the sample std is roughly sigma / sqrt(2n)
        let tol = 3.0 * 0.1 / (2.0 * n).sqrt();
        assert!((std - 0.1).abs() < tol, "std {std}");
    }

    #[test]
    fn eval_forward_deterministic() {
        let mut rng = Rng::new(9);
        let spec = NetSpec {
            input_dim: 4,
            hidden: vec![(5, Activation::Sigmoid)],
            output_dim: 2,
        };
        let net = init(&spec, GateKind::Hc, 0.5, &mut rng).unwrap();
        let x = Matrix::from_rows(&[vec![0.1, 0.2, 0.3, 0.4]]).unwrap();
        assert_eq!(net.forward_eval(&x).unwrap(), net.forward_eval(&x).unwrap());
    }

    #[test]
    fn removing_a_column_equals_closing_its_gate() {
        let mut rng = Rng::new(21);
        let spec = NetSpec {
            input_dim: 4,
            hidden: vec![(6, Activation::Tanh)],
            output_dim: 1,
        };
        let mut net = init(&spec, GateKind::Stg, 0.5, &mut rng).unwrap();
        net.gate.mu = vec![1.2, 0.8, 0.6, 0.9];
        let x = Matrix::from_rows(&[vec![0.5, -0.3, 0.8, 0.1], vec![1.0, 0.4, -0.2, 0.6]]).unwrap();

        // Close gate 2 exactly.
        let mut closed = net.clone();
        closed.gate.mu[2] = -1.0;
        let closed_out = closed.forward_eval(&x).unwrap();

        // Delete column 2 instead (zeroing the column is identical because
        // the gated input is x_d * z_d).
        let x_zeroed = {
            let mut m = x.clone();
            for r in 0..m.rows() {
                m.set(r, 2, 0.0);
            }
            m
        };
        let deleted_out = closed.forward_eval(&x_zeroed).unwrap();
        for (a, b) in closed_out.iter().zip(deleted_out.iter()) {
            assert_eq!(a, b);
        }
    }

    fn objective(net: &Network, x: &Matrix, y: &[f64], z_fixed: &[f64], lambda: f64) -> f64 {
        // Deterministic objective with a frozen gate draw.
        let gated = x.scale_rows_by(z_fixed).unwrap();
        let preds = net.run_stack(&gated).unwrap().0;
        let (loss, _) = crate::losses::mse(&preds.column(0), y).unwrap();
        let (reg, _) = gates::gate_reg(&net.gate).unwrap();
        loss + lambda * reg / net.gate.dim() as f64
    }

    #[test]
    fn backward_matches_finite_differences() {
        // 2-layer tanh net, D = 4, frozen noise, every parameter class.
        let mut rng = Rng::new(33);
        let spec = NetSpec {
            input_dim: 4,
            hidden: vec![(5, Activation::Tanh), (3, Activation::Tanh)],
            output_dim: 1,
        };
        let mut net = init(&spec, GateKind::Stg, 0.5, &mut rng).unwrap();
        net.gate.mu = vec![0.4, 0.6, 0.3, 0.8];
        let x = Matrix::from_rows(&[
            vec![0.2, -0.5, 0.9, 0.1],
            vec![-0.3, 0.8, 0.2, -0.6],
            vec![0.5, 0.1, -0.7, 0.4],
        ])
        .unwrap();
        let y = vec![0.3, -0.2, 0.8];
        let lambda = 0.7;

        let (preds, cache) = net.forward_train(&x, &mut Rng::new(5), false).unwrap();
        let z_fixed = cache.sample().z.clone();
        let (_, dpred_vec) = crate::losses::mse(&preds.column(0), &y).unwrap();
        let d_pred = Matrix::new(3, 1, dpred_vec).unwrap();
        let g = net.backward(&cache, &d_pred, lambda).unwrap();

        let h = 1e-5;
        // Weights and biases.
        for l in 0..net.layers.len() {
            for idx in 0..net.layers[l].weight.data().len() {
                let mut up = net.clone();
                up.layers[l].weight.data_mut()[idx] += h;
                let mut dn = net.clone();
                dn.layers[l].weight.data_mut()[idx] -= h;
                let fd = (objective(&up, &x, &y, &z_fixed, lambda)
                    - objective(&dn, &x, &y, &z_fixed, lambda))
                    / (2.0 * h);
                let got = g.d_weights[l].data()[idx];
                let denom = fd.abs().max(1e-6);
                assert!(
                    (got - fd).abs() / denom < 1e-4,
                    "weight layer {l} idx {idx}: {got} vs {fd}"
                );
            }
            for bidx in 0..net.layers[l].bias.len() {
                let mut up = net.clone();
                up.layers[l].bias[bidx] += h;
                let mut dn = net.clone();
                dn.layers[l].bias[bidx] -= h;
                let fd = (objective(&up, &x, &y, &z_fixed, lambda)
                    - objective(&dn, &x, &y, &z_fixed, lambda))
                    / (2.0 * h);
                let got = g.d_biases[l][bidx];
                let denom = fd.abs().max(1e-6);
                assert!(
                    (got - fd).abs() / denom < 1e-4,
                    "bias layer {l} idx {bidx}: {got} vs {fd}"
                );
            }
        }
        // Gate parameters: freeze eps and move mu (the draw z moves with mu).
        for d in 0..4 {
            let eps = cache.sample().eps.clone();
            let obj_at = |mu_d: f64| {
                let mut m = net.clone();
                m.gate.mu[d] = mu_d;
                let z: Vec<f64> = m
                    .gate
                    .mu
                    .iter()
                    .zip(&eps)
                    .map(|(&mu, &e)| crate::special::hard_sigmoid(mu + e))
                    .collect();
                objective(&m, &x, &y, &z, lambda)
            };
            let fd = (obj_at(net.gate.mu[d] + h) - obj_at(net.gate.mu[d] - h)) / (2.0 * h);
            let got = g.d_mu[d];
            let denom = fd.abs().max(1e-6);
            assert!(
                (got - fd).abs() / denom < 1e-4,
                "mu {d}: {got} vs {fd}"
            );
        }
    }

    #[test]
    fn lambda_zero_open_gates_chain_rule_structure() {
        // With lambda = 0 and gates saturated open on the interior, d_mu is
        // exactly the input gradient times x where the draw is interior.
        let net = linear_net(vec![2.0, -1.0], vec![0.5, 0.5]);
        let x = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let (preds, cache) = net.forward_train(&x, &mut Rng::new(8), false).unwrap();
        let (_, dvec) = crate::losses::mse(&preds.column(0), &[0.0]).unwrap();
        let d_pred = Matrix::new(1, 1, dvec.clone()).unwrap();
        let g = net.backward(&cache, &d_pred, 0.0).unwrap();
        for d in 0..2 {
            let interior = cache.sample().z[d] > 0.0 && cache.sample().z[d] < 1.0;
            let expect = if interior {
                dvec[0] * net.layers[0].weight.get(0, d) * x.get(0, d)
            } else {
                0.0
            };
            assert!((g.d_mu[d] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_net_matches_analytic_least_squares_gradient() {
        // Fully open gates, identity activation: dW must equal 2 X^T (X w - y) / N.
        let net = linear_net(vec![0.7, -0.4], vec![5.0, 5.0]);
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![-0.5, 0.3], vec![0.8, -1.2]]).unwrap();
        let y = vec![0.5, -0.1, 0.9];
        let (preds, cache) = net.forward_train(&x, &mut Rng::new(2), false).unwrap();
        let (_, dvec) = crate::losses::mse(&preds.column(0), &y).unwrap();
        let d_pred = Matrix::new(3, 1, dvec).unwrap();
        let g = net.backward(&cache, &d_pred, 0.0).unwrap();

        let w = vec![0.7, -0.4];
        let n = 3.0;
        let mut analytic = vec![0.0, 0.0];
        for i in 0..3 {
            let pred: f64 = x.row(i).iter().zip(&w).map(|(a, b)| a * b).sum();
            for d in 0..2 {
                analytic[d] += 2.0 * (pred - y[i]) * x.get(i, d) / n;
            }
        }
        for d in 0..2 {
            assert!(
                (g.d_weights[0].get(0, d) - analytic[d]).abs() < 1e-10,
                "coord {d}"
            );
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = Rng::new(12);
        let spec = NetSpec {
            input_dim: 3,
            hidden: vec![(4, Activation::Selu)],
            output_dim: 2,
        };
        let net = init(&spec, GateKind::Hc, 0.5, &mut rng).unwrap();
        let dir = std::env::temp_dir().join("stg_ckpt_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.json");
        net.save(&path).unwrap();
        let back = Network::load(&path).unwrap();
        assert_eq!(net, back);
    }
}

//! Input-feature gates: the Gaussian-based stochastic gate (STG), the
//! Hard-Concrete relaxation (HC), and the deterministic non-convex gate (DNC).
//!
//! A gate layer attaches one multiplicative gate to each of the D input
//! features. During training the gate value is a sample in [0, 1]; after
//! training the deterministic test gate decides which features survive.
//! The regularizer is the expected number of open gates, which has a closed
//! form per mechanism and a smooth gradient in the gate parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::special::{gauss_cdf, gauss_pdf, hard_sigmoid, sigmoid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    /// Hard-sigmoid of a mean-shifted Gaussian: z = clip(mu + eps, 0, 1).
    Stg,
    /// Stretched-and-clipped Binary Concrete on logistic noise.
    Hc,
    /// Noise-free counterpart of STG with the same penalty.
    Dnc,
}

impl GateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GateKind::Stg => "stg",
            GateKind::Hc => "hc",
            GateKind::Dnc => "dnc",
        }
    }
}

/// Hard-Concrete hyperparameters: temperature `beta` and the stretch
/// interval (`tau`, `zeta`) with tau < 0 < 1 < zeta.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HcParams {
    pub beta: f64,
    pub zeta: f64,
    pub tau: f64,
}

impl Default for HcParams {
    /// The published defaults of the Hard-Concrete paper.
    fn default() -> Self {
        Self {
            beta: 2.0 / 3.0,
            zeta: 1.1,
            tau: -0.1,
        }
    }
}

impl HcParams {
    fn validate(&self) -> Result<()> {
        if !(self.tau < 0.0 && self.zeta > 1.0 && self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Domain(format!(
                "hard-concrete needs tau < 0 < 1 < zeta and 0 < beta < 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// log(-tau / zeta), the stretch correction inside the active probability.
    fn stretch_log(&self) -> f64 {
        (-self.tau / self.zeta).ln()
    }

    /// log-alpha giving the requested activation probability.
    pub fn log_alpha_for_active_prob(&self, p: f64) -> f64 {
        (p / (1.0 - p)).ln() + self.beta * self.stretch_log()
    }
}

/// Default gate-noise scale; the regularizer gradient at the initial mu is
/// near its maximum there, which keeps nuisance gates moving early on.
pub const DEFAULT_SIGMA: f64 = 0.5;

/// Initial value of every gate parameter mu.
pub const MU_INIT: f64 = 0.5;

/// Per-feature gate parameters.
///
/// `mu` holds the shift parameter for STG/DNC and log-alpha for HC. `sigma`
/// is the Gaussian noise scale (STG/DNC only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateLayer {
    pub kind: GateKind,
    pub mu: Vec<f64>,
    pub sigma: f64,
    pub hc: HcParams,
}

impl GateLayer {
    /// Fresh layer with every gate at its initial value. STG/DNC start at
    /// mu = 0.5; HC starts at the log-alpha whose activation probability
    /// matches the STG start, so the mechanisms begin from the same place.
    pub fn new(kind: GateKind, dim: usize, sigma: f64) -> Result<Self> {
        Self::with_params(kind, dim, sigma, HcParams::default())
    }

    pub fn with_params(kind: GateKind, dim: usize, sigma: f64, hc: HcParams) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("gate layer needs at least one feature".into()));
        }
        if kind != GateKind::Hc && !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        hc.validate()?;
        let init = match kind {
            GateKind::Stg | GateKind::Dnc => MU_INIT,
            GateKind::Hc => hc.log_alpha_for_active_prob(gauss_cdf(MU_INIT / sigma.max(1e-12))?),
        };
        Ok(Self {
            kind,
            mu: vec![init; dim],
            sigma,
            hc,
        })
    }

    /// Layer with explicit parameters, for tests and checkpoint loading.
    pub fn with_mu(kind: GateKind, mu: Vec<f64>, sigma: f64, hc: HcParams) -> Result<Self> {
        let mut layer = Self::with_params(kind, mu.len(), sigma, hc)?;
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("gate parameters must be finite".into()));
        }
        layer.mu = mu;
        Ok(layer)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// One draw of the gate vector, with the noise kept for gradient replay.
///
/// `eps` stores the Gaussian draw for STG, the logistic draw for HC, and is
/// all-zero for the deterministic DNC gate.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSample {
    pub z: Vec<f64>,
    pub eps: Vec<f64>,
}

/// STG draw: z_d = clip(mu_d + eps_d, 0, 1), eps_d ~ N(0, sigma^2) i.i.d.
pub fn stg_sample(layer: &GateLayer, rng: &mut Rng) -> Result<GateSample> {
    if layer.kind != GateKind::Stg {
        return Err(Error::Usage(format!(
            "stg_sample on a {} layer",
            layer.kind.as_str()
        )));
    }
    let mut z = Vec::with_capacity(layer.dim());
    let mut eps = Vec::with_capacity(layer.dim());
    for &mu in &layer.mu {
        let e = layer.sigma * rng.standard_gaussian();
        eps.push(e);
        z.push(hard_sigmoid(mu + e));
    }
    Ok(GateSample { z, eps })
}

/// Expected number of open gates, sum_d Phi(mu_d / sigma), and its gradient
/// in mu, which is the N(0, sigma^2) density at mu_d. The caller applies
/// lambda and the 1/D rescale.
pub fn stg_reg(layer: &GateLayer) -> Result<(f64, Vec<f64>)> {
    if layer.kind == GateKind::Hc {
        return Err(Error::Usage("stg_reg on an hc layer".into()));
    }
    let mut value = 0.0;
    let mut grad = Vec::with_capacity(layer.dim());
    for &mu in &layer.mu {
        value += gauss_cdf(mu / layer.sigma)?;
        grad.push(gauss_pdf(mu, layer.sigma)?);
    }
    Ok((value, grad))
}

/// Pathwise gradient of the loss in mu: upstream_d times the hard-sigmoid
/// derivative, which is 1 exactly when the pre-clip value lies inside the
/// open interval (0, 1). A clipped sample satisfies z in {0, 1}, so the
/// indicator can be read off the stored z.
pub fn stg_grad_mu(sample: &GateSample, upstream: &[f64]) -> Result<Vec<f64>> {
    if upstream.len() != sample.z.len() {
        return Err(Error::Shape(format!(
            "upstream length {} vs gate dim {}",
            upstream.len(),
            sample.z.len()
        )));
    }
    Ok(sample
        .z
        .iter()
        .zip(upstream)
        .map(|(&z, &u)| if z > 0.0 && z < 1.0 { u } else { 0.0 })
        .collect())
}

/// Deterministic test-time gate: z_hat_d = clip(mu_d, 0, 1).
pub fn stg_test_gate(layer: &GateLayer) -> Result<Vec<f64>> {
    if layer.kind == GateKind::Hc {
        return Err(Error::Usage("stg_test_gate on an hc layer".into()));
    }
    Ok(layer.mu.iter().map(|&m| hard_sigmoid(m)).collect())
}

/// Indices whose gate value strictly exceeds the cutoff (0-based).
pub fn selected_set(gate_values: &[f64], cutoff: f64) -> Vec<usize> {
    gate_values
        .iter()
        .enumerate()
        .filter(|(_, &z)| z > cutoff)
        .map(|(d, _)| d)
        .collect()
}

/// Hard-Concrete draw:
/// u ~ U(0,1), L = log u - log(1-u), s = sigmoid((log_alpha + L) / beta),
/// s_bar = s (zeta - tau) + tau, z = clip(s_bar, 0, 1).
pub fn hc_sample(layer: &GateLayer, rng: &mut Rng) -> Result<GateSample> {
    if layer.kind != GateKind::Hc {
        return Err(Error::Usage(format!(
            "hc_sample on a {} layer",
            layer.kind.as_str()
        )));
    }
    let mut z = Vec::with_capacity(layer.dim());
    let mut eps = Vec::with_capacity(layer.dim());
    for &log_alpha in &layer.mu {
        let u = rng.next_f64_open();
        let l = u.ln() - (1.0 - u).ln();
        eps.push(l);
        z.push(hc_value(layer.hc, log_alpha, l));
    }
    Ok(GateSample { z, eps })
}

fn hc_value(hc: HcParams, log_alpha: f64, logistic: f64) -> f64 {
    let s = sigmoid((log_alpha + logistic) / hc.beta);
    hard_sigmoid(s * (hc.zeta - hc.tau) + hc.tau)
}

/// Closed-form probability that each HC gate is active:
/// sigmoid(log_alpha - beta log(-tau / zeta)).
pub fn hc_active_prob(layer: &GateLayer) -> Result<Vec<f64>> {
    if layer.kind != GateKind::Hc {
        return Err(Error::Usage("hc_active_prob on a non-hc layer".into()));
    }
    let c = layer.hc.beta * layer.hc.stretch_log();
    Ok(layer.mu.iter().map(|&a| sigmoid(a - c)).collect())
}

/// HC regularizer: sum of active probabilities and its gradient in
/// log-alpha, which is p(1-p) per coordinate.
pub fn hc_reg(layer: &GateLayer) -> Result<(f64, Vec<f64>)> {
    let probs = hc_active_prob(layer)?;
    let value = probs.iter().sum();
    let grad = probs.iter().map(|&p| p * (1.0 - p)).collect();
    Ok((value, grad))
}

/// Deterministic non-convex gate: z_tilde_d = clip(mu_d, 0, 1), no noise.
/// Shares the Phi-based penalty with STG via [`stg_reg`].
pub fn dnc_gate(layer: &GateLayer) -> Result<Vec<f64>> {
    if layer.kind != GateKind::Dnc {
        return Err(Error::Usage(format!(
            "dnc_gate on a {} layer",
            layer.kind.as_str()
        )));
    }
    Ok(layer.mu.iter().map(|&m| hard_sigmoid(m)).collect())
}

/// Gate used by a deterministic (evaluation-mode) forward pass: the test
/// gate for STG/DNC, the noise-free chain (u = 1/2, so L = 0) for HC.
pub fn eval_gate(layer: &GateLayer) -> Vec<f64> {
    match layer.kind {
        GateKind::Stg | GateKind::Dnc => layer.mu.iter().map(|&m| hard_sigmoid(m)).collect(),
        GateKind::Hc => layer
            .mu
            .iter()
            .map(|&a| hc_value(layer.hc, a, 0.0))
            .collect(),
    }
}

/// One gate draw in train mode, dispatching on the mechanism. DNC is
/// deterministic, so its "sample" is the test gate with zero noise.
pub fn train_sample(layer: &GateLayer, rng: &mut Rng) -> Result<GateSample> {
    match layer.kind {
        GateKind::Stg => stg_sample(layer, rng),
        GateKind::Hc => hc_sample(layer, rng),
        GateKind::Dnc => Ok(GateSample {
            z: dnc_gate(layer)?,
            eps: vec![0.0; layer.dim()],
        }),
    }
}

/// Pathwise gradient of the loss in the gate parameter for a stored sample.
pub fn gate_param_grad(layer: &GateLayer, sample: &GateSample, upstream: &[f64]) -> Result<Vec<f64>> {
    if upstream.len() != layer.dim() || sample.z.len() != layer.dim() {
        return Err(Error::Shape("gate gradient length mismatch".into()));
    }
    match layer.kind {
        GateKind::Stg | GateKind::Dnc => stg_grad_mu(sample, upstream),
        GateKind::Hc => {
            let span = layer.hc.zeta - layer.hc.tau;
            Ok(sample
                .z
                .iter()
                .zip(upstream)
                .map(|(&z, &u)| {
                    if z > 0.0 && z < 1.0 {
                        // Interior: z = s * span + tau, so s is recoverable.
                        let s = (z - layer.hc.tau) / span;
                        u * span * s * (1.0 - s) / layer.hc.beta
                    } else {
                        0.0
                    }
                })
                .collect())
        }
    }
}

/// Closed-form regularizer (expected open-gate count) for any mechanism.
pub fn gate_reg(layer: &GateLayer) -> Result<(f64, Vec<f64>)> {
    match layer.kind {
        GateKind::Stg | GateKind::Dnc => stg_reg(layer),
        GateKind::Hc => hc_reg(layer),
    }
}

/// Per-coordinate sample variance of the pathwise gradient estimator across
/// `n_samples` fresh gate draws. `loss_grad_at` maps a gate vector z to the
/// upstream gradient dL/dz.
pub fn grad_variance_estimate(
    layer: &GateLayer,
    loss_grad_at: impl Fn(&[f64]) -> Vec<f64>,
    rng: &mut Rng,
    n_samples: usize,
) -> Result<Vec<f64>> {
    if n_samples < 2 {
        return Err(Error::Domain("variance needs n_samples >= 2".into()));
    }
    let d = layer.dim();
    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    for _ in 0..n_samples {
        let sample = train_sample(layer, rng)?;
        let upstream = loss_grad_at(&sample.z);
        let g = gate_param_grad(layer, &sample, &upstream)?;
        for (d, &v) in g.iter().enumerate() {
            sum[d] += v;
            sum_sq[d] += v * v;
        }
    }
    let n = n_samples as f64;
    Ok(sum
        .iter()
        .zip(&sum_sq)
        .map(|(&s, &ss)| ((ss - s * s / n) / (n - 1.0)).max(0.0))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stg(mu: Vec<f64>, sigma: f64) -> GateLayer {
        GateLayer::with_mu(GateKind::Stg, mu, sigma, HcParams::default()).unwrap()
    }

    fn hc(log_alpha: Vec<f64>) -> GateLayer {
        GateLayer::with_mu(GateKind::Hc, log_alpha, DEFAULT_SIGMA, HcParams::default()).unwrap()
    }

    fn dnc(mu: Vec<f64>) -> GateLayer {
        GateLayer::with_mu(GateKind::Dnc, mu, DEFAULT_SIGMA, HcParams::default()).unwrap()
    }

    #[test]
    fn stg_sample_noise_free_limit() {
        let layer = stg(vec![0.5], 1e-12);
        let mut rng = Rng::new(0);
        let s = stg_sample(&layer, &mut rng).unwrap();
        assert!((s.z[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn stg_sample_saturates_for_large_mu() {
        let layer = stg(vec![10.0], 0.5);
        let mut rng = Rng::new(3);
        for _ in 0..1000 {
            assert_eq!(stg_sample(&layer, &mut rng).unwrap().z[0], 1.0);
        }
    }

    #[test]
    fn stg_sample_open_probability_matches_cdf() {
        // P(z > 0) = Phi(mu / sigma) = Phi(0.4) for mu = 0.2, sigma = 0.5.
        let layer = stg(vec![0.2], 0.5);
        let mut rng = Rng::new(11);
        let n = 1_000_000;
        let mut open = 0usize;
        for _ in 0..n {
            if stg_sample(&layer, &mut rng).unwrap().z[0] > 0.0 {
                open += 1;
            }
        }
        let p = gauss_cdf(0.4).unwrap();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let diff = (open as f64 / n as f64 - p).abs();
        assert!(diff < 3.0 * se, "diff {diff}, 3se {}", 3.0 * se);
    }

    #[test]
    fn stg_sample_wrong_kind_is_usage_error() {
        let layer = dnc(vec![0.5]);
        let mut rng = Rng::new(0);
        assert!(matches!(
            stg_sample(&layer, &mut rng),
            Err(Error::Usage(_))
        ));
        assert!(matches!(hc_sample(&layer, &mut rng), Err(Error::Usage(_))));
    }

    #[test]
    fn stg_reg_values() {
        let (v, _) = stg_reg(&stg(vec![0.0, 0.0], 0.5)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let (v, g) = stg_reg(&stg(vec![0.5], 0.5)).unwrap();
        assert!((v - 0.841345).abs() < 1e-6);
        assert!((g[0] - 0.483941).abs() < 1e-6);
    }

    #[test]
    fn stg_reg_grad_matches_finite_differences() {
        let h = 1e-6;
        for &mu in &[-1.2, -0.3, 0.0, 0.4, 1.7] {
            let (_, g) = stg_reg(&stg(vec![mu], 0.5)).unwrap();
            let (vp, _) = stg_reg(&stg(vec![mu + h], 0.5)).unwrap();
            let (vm, _) = stg_reg(&stg(vec![mu - h], 0.5)).unwrap();
            let fd = (vp - vm) / (2.0 * h);
            assert!(
                ((g[0] - fd) / fd).abs() < 1e-5,
                "mu {mu}: grad {} vs fd {fd}",
                g[0]
            );
        }
    }

    #[test]
    fn stg_grad_mu_interior_indicator() {
        let s = GateSample {
            z: vec![0.3, 1.0],
            eps: vec![0.0, 0.0],
        };
        let g = stg_grad_mu(&s, &[2.0, 2.0]).unwrap();
        assert_eq!(g, vec![2.0, 0.0]);
        assert!(stg_grad_mu(&s, &[1.0]).is_err());
    }

    #[test]
    fn stg_grad_mu_finite_difference_on_quadratic() {
        // L(z) = sum z^2 with frozen noise; interior coordinates only.
        let sigma = 0.5;
        let mu = [0.4, 0.1, 0.7];
        let eps = [0.05, -0.02, 0.1];
        let loss = |m: &[f64]| -> f64 {
            m.iter()
                .zip(&eps)
                .map(|(&mu, &e)| hard_sigmoid(mu + e).powi(2))
                .sum()
        };
        let z: Vec<f64> = mu.iter().zip(&eps).map(|(&m, &e)| hard_sigmoid(m + e)).collect();
        let sample = GateSample {
            z: z.clone(),
            eps: eps.to_vec(),
        };
        let upstream: Vec<f64> = z.iter().map(|&v| 2.0 * v).collect();
        let g = stg_grad_mu(&sample, &upstream).unwrap();
        let h = 1e-6;
        for d in 0..3 {
            let mut p = mu.to_vec();
            p[d] += h;
            let mut m = mu.to_vec();
            m[d] -= h;
            let fd = (loss(&p) - loss(&m)) / (2.0 * h);
            assert!(((g[d] - fd) / fd).abs() < 1e-5, "coord {d}");
        }
        let _ = sigma;
    }

    #[test]
    fn test_gate_clipping_and_selection() {
        let layer = stg(vec![0.5, -0.3, 1.4], 0.5);
        let zhat = stg_test_gate(&layer).unwrap();
        assert_eq!(zhat, vec![0.5, 0.0, 1.0]);
        assert_eq!(selected_set(&zhat, 0.0), vec![0, 2]);
        assert_eq!(selected_set(&zhat, 0.5), vec![2]);
    }

    #[test]
    fn hc_sample_hand_chain() {
        // u = 1/2 gives L = 0; with log-alpha 0 the chain lands on
        // 0.5 * (zeta - tau) + tau = 0.5.
        assert!((hc_value(HcParams::default(), 0.0, 0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hc_sample_saturated_gate() {
        let layer = hc(vec![50.0]);
        let mut rng = Rng::new(2);
        for _ in 0..100 {
            assert_eq!(hc_sample(&layer, &mut rng).unwrap().z[0], 1.0);
        }
    }

    #[test]
    fn hc_open_probability_matches_closed_form() {
        let layer = hc(vec![0.3]);
        let p = hc_active_prob(&layer).unwrap()[0];
        let mut rng = Rng::new(17);
        let n = 1_000_000;
        let mut open = 0usize;
        for _ in 0..n {
            if hc_sample(&layer, &mut rng).unwrap().z[0] > 0.0 {
                open += 1;
            }
        }
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let diff = (open as f64 / n as f64 - p).abs();
        assert!(diff < 3.0 * se, "diff {diff}, 3se {}", 3.0 * se);
    }

    #[test]
    fn hc_active_prob_reference_value() {
        // sigmoid((2/3) ln 11) = 0.8318221839916905
        let p = hc_active_prob(&hc(vec![0.0])).unwrap()[0];
        assert!((p - 0.831822).abs() < 1e-4, "got {p}");
        let tiny = hc_active_prob(&hc(vec![-50.0])).unwrap()[0];
        assert!(tiny < 1e-15);
    }

    #[test]
    fn hc_reg_grad_matches_finite_differences() {
        let h = 1e-6;
        for &a in &[-2.0, -0.5, 0.0, 0.9, 2.5] {
            let (_, g) = hc_reg(&hc(vec![a])).unwrap();
            let (vp, _) = hc_reg(&hc(vec![a + h])).unwrap();
            let (vm, _) = hc_reg(&hc(vec![a - h])).unwrap();
            let fd = (vp - vm) / (2.0 * h);
            assert!(((g[0] - fd) / fd).abs() < 1e-5, "log-alpha {a}");
        }
    }

    #[test]
    fn dnc_gate_equals_test_gate() {
        let layer = dnc(vec![0.5, -0.2, 1.3]);
        assert_eq!(dnc_gate(&layer).unwrap(), vec![0.5, 0.0, 1.0]);
        let as_stg = stg(vec![0.5, -0.2, 1.3], 0.5);
        assert_eq!(dnc_gate(&layer).unwrap(), stg_test_gate(&as_stg).unwrap());
    }

    #[test]
    fn dnc_gate_gradient_finite_difference() {
        let layer = dnc(vec![0.4, 1.6, -0.3]);
        let sample = train_sample(&layer, &mut Rng::new(0)).unwrap();
        let g = gate_param_grad(&layer, &sample, &[1.0, 1.0, 1.0]).unwrap();
        let h = 1e-6;
        for d in 0..3 {
            let mut up = layer.mu.clone();
            up[d] += h;
            let mut dn = layer.mu.clone();
            dn[d] -= h;
            let fd = (hard_sigmoid(up[d]) - hard_sigmoid(dn[d])) / (2.0 * h);
            assert!((g[d] - fd).abs() < 1e-9, "coord {d}: {} vs {fd}", g[d]);
        }
    }

    #[test]
    fn variance_zero_for_deterministic_gates() {
        let layer = dnc(vec![0.5, 0.2]);
        let mut rng = Rng::new(1);
        let v = grad_variance_estimate(&layer, |z| vec![1.0; z.len()], &mut rng, 100).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);

        let nearly = stg(vec![0.5], 1e-9);
        let v = grad_variance_estimate(&nearly, |z| vec![1.0; z.len()], &mut rng, 1000).unwrap();
        assert!(v[0] < 1e-12);
    }

    #[test]
    fn variance_matches_bernoulli_interior_indicator() {
        // L(z) = z: gradient is the interior indicator, so its variance is
        // p(1-p) with p = P(0 < mu + eps < 1) = Phi(1) - Phi(-1).
        let layer = stg(vec![0.5], 0.5);
        let p = gauss_cdf(1.0).unwrap() - gauss_cdf(-1.0).unwrap();
        let expect = p * (1.0 - p);
        let mut rng = Rng::new(23);
        let n = 200_000;
        let v = grad_variance_estimate(&layer, |z| vec![1.0; z.len()], &mut rng, n).unwrap();
        assert!(
            (v[0] - expect).abs() < 5e-3,
            "variance {} vs {expect}",
            v[0]
        );
    }

    #[test]
    fn stg_closed_probability_matches_cdf() {
        // P(z = 0) = Phi(-mu / sigma).
        let layer = stg(vec![0.3], 0.5);
        let p = gauss_cdf(-0.3 / 0.5).unwrap();
        let mut rng = Rng::new(31);
        let n = 500_000;
        let mut closed = 0usize;
        for _ in 0..n {
            if stg_sample(&layer, &mut rng).unwrap().z[0] == 0.0 {
                closed += 1;
            }
        }
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((closed as f64 / n as f64 - p).abs() < 3.0 * se);
    }

    #[test]
    fn variance_comparison_in_probability_scale() {
        // STG vs HC at matched activation probability 0.7 on L(z) = sum z.
        // The two mechanisms parameterize the gate differently (mu vs
        // log-alpha), so raw parameter gradients live on different scales;
        // the comparable quantity is the gradient with respect to the
        // activation probability, i.e. variance / (dp/dparam)^2.
        let sigma = DEFAULT_SIGMA;
        let p_target = 0.7;
        let (mut lo, mut hi) = (0.0f64, 3.0f64);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if gauss_cdf(m).unwrap() < p_target {
                lo = m;
            } else {
                hi = m;
            }
        }
        let mu = sigma * 0.5 * (lo + hi);
        let stg_layer = stg(vec![mu], sigma);
        let hc_params = HcParams::default();
        let hc_layer = GateLayer::with_mu(
            GateKind::Hc,
            vec![hc_params.log_alpha_for_active_prob(p_target)],
            sigma,
            hc_params,
        )
        .unwrap();

        let mut rng = Rng::new(99);
        let n = 100_000;
        let ones = |z: &[f64]| vec![1.0; z.len()];
        let v_stg = grad_variance_estimate(&stg_layer, ones, &mut rng, n).unwrap()[0];
        let v_hc = grad_variance_estimate(&hc_layer, ones, &mut rng, n).unwrap()[0];

        let dp_stg = gauss_pdf(mu, sigma).unwrap() / 1.0; // d Phi(mu/sigma) / d mu
        let dp_hc = p_target * (1.0 - p_target); // d sigmoid / d log-alpha
        let stg_scaled = v_stg / (dp_stg * dp_stg);
        let hc_scaled = v_hc / (dp_hc * dp_hc);
        assert!(
            stg_scaled <= hc_scaled,
            "probability-scale variance: stg {stg_scaled} vs hc {hc_scaled}"
        );
    }

    #[test]
    fn monotone_in_parameters() {
        let mut prev = 0.0;
        for i in 0..40 {
            let a = -4.0 + 0.2 * i as f64;
            let p = hc_active_prob(&hc(vec![a])).unwrap()[0];
            assert!(p > prev);
            prev = p;
        }
        let mut prev = 0.0;
        for i in 0..40 {
            let mu = -4.0 + 0.2 * i as f64;
            let (v, _) = stg_reg(&stg(vec![mu], 0.5)).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn invalid_hyperparameters_rejected() {
        assert!(GateLayer::new(GateKind::Stg, 0, 0.5).is_err());
        assert!(GateLayer::new(GateKind::Stg, 3, 0.0).is_err());
        assert!(GateLayer::with_params(
            GateKind::Hc,
            3,
            0.5,
            HcParams {
                beta: 1.5,
                zeta: 1.1,
                tau: -0.1
            }
        )
        .is_err());
        assert!(GateLayer::with_params(
            GateKind::Hc,
            3,
            0.5,
            HcParams {
                beta: 0.5,
                zeta: 0.9,
                tau: -0.1
            }
        )
        .is_err());
    }
}

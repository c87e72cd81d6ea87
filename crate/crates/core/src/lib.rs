//! Embedded feature selection with stochastic input gates.
//!
//! The crate trains feedforward networks whose inputs pass through per-feature
//! gates. A gate is a continuous relaxation of a Bernoulli selection variable;
//! the expected number of open gates is a differentiable penalty, so selecting
//! features and fitting the predictor happen in one gradient-based
//! optimization. Three gate mechanisms are provided (Gaussian-based stochastic
//! gates, Hard-Concrete, and a deterministic non-convex gate), together with a
//! LASSO baseline, synthetic benchmark generators, and the metric suite used
//! to evaluate selection quality.

pub mod baselines;
pub mod datagen;
pub mod error;
pub mod gates;
pub mod losses;
pub mod matrix;
pub mod metrics;
pub mod net;
pub mod optim;
pub mod rng;
pub mod special;
pub mod testkit;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use rng::Rng;

//! Optimizers: the adaptive stochastic Nesterov-accelerated quasi-Newton
//! step, its limited-memory direction engine, the adaQN baseline, dense
//! full-batch BFGS/NAQ, first-order baselines, and the per-iteration cost
//! model.

mod adaqn;
mod asnaq;
mod buffers;
mod cost;
mod dense;
mod first_order;
mod two_loop;

pub use adaqn::{adaqn_step, AdaqnState};
pub use asnaq::{asnaq_step, AsnaqState};
pub use buffers::{
    curvature_admit, fim_y, h0_diag, AccumGradSquares, CurvatureBuffer, CurvaturePair, FimBuffer,
};
pub use cost::{cost_model, Algorithm, CostModelInput, CostReport};
pub use dense::{dense_bfgs_update, naq_full_batch_step, DenseHessian, NaqState};
pub use first_order::{adagrad_step, adam_step, AdagradState, AdamState};
pub use two_loop::two_loop_direction;

use crate::error::{Error, Result};

/// Shared optimizer hyperparameters. Defaults are the benchmark settings:
/// learning rate 0.01, momentum bounds [0.1, 0.99], momentum factor 1.1,
/// error-control factor 1.01, aggregation every 5 iterations, 10 curvature
/// pairs, 100 stored gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Learning rate (constant; no line search, no decay).
    pub alpha: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    /// Momentum update factor: scaled up on accepted aggregations, down on
    /// error-control resets.
    pub phi: f64,
    /// Error-control threshold factor: reset when the aggregated loss
    /// exceeds `gamma` times the previous aggregated loss.
    pub gamma: f64,
    /// Aggregation period in iterations.
    pub update_every: u64,
    /// Curvature-pair buffer capacity.
    pub curvature_capacity: usize,
    /// Stored-gradient buffer capacity.
    pub fim_capacity: usize,
    /// Regularizer inside the inverse-sqrt diagonal seed.
    pub eps_h0: f64,
    /// Curvature-admission tolerance: store a pair only if s'y > eps * y'y.
    pub eps_curv: f64,
    /// Iteration budget.
    pub k_max: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            mu_min: 0.1,
            mu_max: 0.99,
            phi: 1.1,
            gamma: 1.01,
            update_every: 5,
            curvature_capacity: 10,
            fim_capacity: 100,
            eps_h0: 1e-8,
            eps_curv: 1e-8,
            k_max: u64::MAX,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        // Written so NaN fails every bound it appears in.
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.alpha) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        let mu_ok = positive(self.mu_min) && self.mu_min <= self.mu_max && self.mu_max < 1.0;
        if !mu_ok {
            return bad(format!(
                "momentum bounds must satisfy 0 < mu_min <= mu_max < 1, got [{}, {}]",
                self.mu_min, self.mu_max
            ));
        }
        if !(self.phi.is_finite() && self.phi > 1.0) {
            return bad(format!("phi must be > 1, got {}", self.phi));
        }
        if !(self.gamma.is_finite() && self.gamma >= 1.0) {
            return bad(format!("gamma must be >= 1, got {}", self.gamma));
        }
        if self.update_every == 0 {
            return bad("update_every must be >= 1".into());
        }
        if self.curvature_capacity == 0 || self.fim_capacity == 0 {
            return bad("buffer capacities must be >= 1".into());
        }
        if !positive(self.eps_h0) {
            return bad(format!("eps_h0 must be > 0, got {}", self.eps_h0));
        }
        if !positive(self.eps_curv) {
            return bad(format!("eps_curv must be > 0, got {}", self.eps_curv));
        }
        if self.k_max == 0 {
            return bad("k_max must be >= 1".into());
        }
        Ok(())
    }
}

/// What one optimizer step did, for logging and invariant checks.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    /// Mini-batch loss at the post-step iterate.
    pub loss: f64,
    /// L2 norm of the raw quasi-Newton direction before normalization.
    pub direction_norm_pre: f64,
    /// Inner product of the raw direction with the gradient it was built
    /// from; negative whenever the direction descends.
    pub dir_dot_grad: f64,
    pub reset_triggered: bool,
    pub pair_stored: bool,
    pub mu_after: f64,
    /// (curvature pairs, stored gradients) after the step.
    pub buffer_sizes: (usize, usize),
}

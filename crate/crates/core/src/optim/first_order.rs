//! First-order baselines: bias-corrected Adam and Adagrad.

use crate::error::Result;
use crate::numkit::ParamVector;
use crate::optim::buffers::{h0_diag, AccumGradSquares};

/// Adam moment state with the textbook defaults
/// (alpha 0.001, beta1 0.9, beta2 0.999, eps 1e-8).
#[derive(Debug)]
pub struct AdamState {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: ParamVector,
    v: ParamVector,
    /// Completed steps, for bias correction.
    pub t: u64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        Self {
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: ParamVector::zeros(dim),
            v: ParamVector::zeros(dim),
            t: 0,
        }
    }
}

/// Standard bias-corrected Adam update, in place.
pub fn adam_step(w: &mut ParamVector, state: &mut AdamState, grad: &ParamVector) -> Result<()> {
    state.t += 1;
    let b1 = state.beta1;
    let b2 = state.beta2;
    let bias1 = 1.0 - b1.powi(state.t as i32);
    let bias2 = 1.0 - b2.powi(state.t as i32);
    for i in 0..w.len() {
        let g = grad[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        let m_hat = state.m[i] / bias1;
        let v_hat = state.v[i] / bias2;
        w[i] -= state.alpha * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}

/// Adagrad state: the running squared-gradient sum shares
/// [`AccumGradSquares`] with the quasi-Newton diagonal seed. Defaults
/// alpha 0.01, eps 1e-8.
#[derive(Debug)]
pub struct AdagradState {
    pub alpha: f64,
    pub eps: f64,
    pub accum: AccumGradSquares,
}

impl AdagradState {
    pub fn new(dim: usize) -> Self {
        Self {
            alpha: 0.01,
            eps: 1e-8,
            accum: AccumGradSquares::new(dim),
        }
    }
}

/// Adagrad update in place: accumulate the squared gradient, then
/// `w -= alpha * g / sqrt(accum + eps)` elementwise.
pub fn adagrad_step(w: &mut ParamVector, state: &mut AdagradState, grad: &ParamVector) -> Result<()> {
    state.accum.accumulate(grad)?;
    let scale = h0_diag(&state.accum, state.eps);
    for i in 0..w.len() {
        w[i] -= state.alpha * grad[i] * scale[i];
    }
    Ok(())
}

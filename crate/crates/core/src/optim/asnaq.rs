//! The adaptive stochastic Nesterov-accelerated quasi-Newton step.
//!
//! Per iteration: gradient at the look-ahead point `w + mu v`, limited-memory
//! direction over the accumulated-squared-gradient diagonal, direction
//! normalization, momentum update of (v, w), and a second gradient at the new
//! iterate pushed into the gradient FIFO. Every `update_every` iterations the
//! running iterate/velocity averages are aggregated; after the first cycle an
//! error-control check on the same mini-batch either rolls the iterate back
//! (clearing both buffers and shrinking the momentum) or forms a curvature
//! pair from the averaged displacement and the FIFO-implied gradient change
//! (growing the momentum).

use crate::error::{Error, Result};
use crate::numkit::{axpy, dot, l2_norm, ParamVector};
use crate::oracle::GradientOracle;
use crate::optim::buffers::{fim_y, h0_diag, AccumGradSquares, CurvatureBuffer, FimBuffer};
use crate::optim::two_loop::two_loop_direction;
use crate::optim::{Hyperparams, StepReport};

/// Full optimizer state across iterations.
#[derive(Debug)]
pub struct AsnaqState {
    /// Current iterate.
    pub w: ParamVector,
    /// Current velocity.
    pub v: ParamVector,
    /// Previous aggregated iterate (rollback target).
    pub w_old: ParamVector,
    /// Previous aggregated velocity.
    pub v_old: ParamVector,
    /// Running sum of pre-update iterates within the current cycle.
    pub w_sum: ParamVector,
    /// Running sum of pre-update velocities within the current cycle.
    pub v_sum: ParamVector,
    /// Adaptive momentum, always within [mu_min, mu_max].
    pub mu: f64,
    /// Completed aggregation cycles.
    pub t: u64,
    /// Completed iterations.
    pub k: u64,
    pub curvature: CurvatureBuffer,
    pub fim: FimBuffer,
    pub accum: AccumGradSquares,
    /// Error-control rollbacks so far.
    pub resets: u64,
    /// Oracle gradient evaluations so far (2 per iteration).
    pub grad_evals: u64,
    /// Oracle loss-only evaluations so far (2 per error-control check).
    pub loss_evals: u64,
}

impl AsnaqState {
    pub fn new(w0: ParamVector, hp: &Hyperparams) -> Result<Self> {
        hp.validate()?;
        let d = w0.len();
        Ok(Self {
            w: w0.clone(),
            v: ParamVector::zeros(d),
            w_old: w0,
            v_old: ParamVector::zeros(d),
            w_sum: ParamVector::zeros(d),
            v_sum: ParamVector::zeros(d),
            mu: hp.mu_min,
            t: 0,
            k: 0,
            curvature: CurvatureBuffer::new(hp.curvature_capacity),
            fim: FimBuffer::new(hp.fim_capacity),
            accum: AccumGradSquares::new(d),
            resets: 0,
            grad_evals: 0,
            loss_evals: 0,
        })
    }
}

fn ensure_finite(
    loss: f64,
    grad: Option<&ParamVector>,
    what: &'static str,
    iteration: u64,
) -> Result<()> {
    if !loss.is_finite() || grad.is_some_and(|g| !g.all_finite()) {
        return Err(Error::NonFiniteAtIteration { what, iteration });
    }
    Ok(())
}

/// Executes exactly one iteration against the supplied mini-batch oracle.
/// The aggregation check fires on iterations where the pre-increment counter
/// is a multiple of `update_every` (so also on the very first iteration,
/// where only the running sums exist and the `t = 0` guard skips both error
/// control and pair storage).
pub fn asnaq_step(
    state: &mut AsnaqState,
    hp: &Hyperparams,
    oracle: &mut dyn GradientOracle,
) -> Result<StepReport> {
    let iteration = state.k;

    // Gradient at the look-ahead point.
    let look_ahead = axpy(state.mu, &state.v, &state.w)?;
    let (loss_ahead, grad_ahead) = oracle.loss_grad(&look_ahead)?;
    state.grad_evals += 1;
    ensure_finite(loss_ahead, Some(&grad_ahead), "look-ahead gradient", iteration)?;

    // The inverse-sqrt diagonal accumulates the search gradients and is
    // never cleared, not even by error-control resets.
    state.accum.accumulate(&grad_ahead)?;
    let h0 = h0_diag(&state.accum, hp.eps_h0);

    let raw_direction = two_loop_direction(&grad_ahead, &state.curvature, &h0)?;
    let direction_norm_pre = l2_norm(&raw_direction);
    let dir_dot_grad = dot(&raw_direction, &grad_ahead)?;

    // Direction normalization; a zero direction (exactly zero gradient)
    // passes through unscaled.
    let direction = if direction_norm_pre > 0.0 {
        raw_direction.scaled(1.0 / direction_norm_pre)
    } else {
        raw_direction
    };

    let mut v_next = state.v.scaled(state.mu);
    v_next.add_scaled(hp.alpha, &direction)?;
    let w_next = axpy(1.0, &v_next, &state.w)?;

    // Second gradient, at the new iterate, feeds the gradient FIFO.
    let (loss_next, grad_next) = oracle.loss_grad(&w_next)?;
    state.grad_evals += 1;
    ensure_finite(loss_next, Some(&grad_next), "post-update gradient", iteration)?;
    state.fim.push(grad_next);

    // Running sums accumulate the pre-update iterate and velocity.
    state.w_sum.add_scaled(1.0, &state.w)?;
    state.v_sum.add_scaled(1.0, &state.v)?;
    state.w = w_next;
    state.v = v_next;

    let mut reset_triggered = false;
    let mut pair_stored = false;

    if iteration.is_multiple_of(hp.update_every) {
        let inv_l = 1.0 / hp.update_every as f64;
        let w_avg = state.w_sum.scaled(inv_l);
        let v_avg = state.v_sum.scaled(inv_l);
        state.w_sum.fill(0.0);
        state.v_sum.fill(0.0);

        if state.t > 0 {
            // Error control on the same mini-batch: compare the loss at the
            // new aggregated iterate against the previous one.
            let loss_avg = oracle.loss(&w_avg)?;
            let loss_old = oracle.loss(&state.w_old)?;
            state.loss_evals += 2;
            ensure_finite(loss_avg, None, "aggregated loss", iteration)?;
            ensure_finite(loss_old, None, "previous aggregated loss", iteration)?;

            if loss_avg > hp.gamma * loss_old {
                state.curvature.clear();
                state.fim.clear();
                state.w = state.w_old.clone();
                state.v = state.v_old.clone();
                state.mu = (state.mu / hp.phi).max(hp.mu_min);
                state.resets += 1;
                reset_triggered = true;
                // Rollback skips pair storage and leaves (w_old, t) as they
                // were; the iteration still counts.
            } else {
                let s = axpy(-1.0, &state.w_old, &w_avg)?;
                let y = fim_y(&state.fim, &s)?;
                state.mu = (state.mu * hp.phi).min(hp.mu_max);
                pair_stored = state.curvature.try_store(s, y, hp.eps_curv)?;
                state.w_old = w_avg;
                state.v_old = v_avg;
                state.t += 1;
            }
        } else {
            state.w_old = w_avg;
            state.v_old = v_avg;
            state.t += 1;
        }
    }

    state.k += 1;
    Ok(StepReport {
        loss: loss_next,
        direction_norm_pre,
        dir_dot_grad,
        reset_triggered,
        pair_stored,
        mu_after: state.mu,
        buffer_sizes: (state.curvature.len(), state.fim.len()),
    })
}

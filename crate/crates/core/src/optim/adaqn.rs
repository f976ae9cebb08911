//! adaQN baseline: the same decoupled iterate/aggregation cycle as the
//! accelerated method, minus the look-ahead gradient, the momentum term, and
//! the direction normalization. One gradient evaluation per iteration.

use crate::error::{Error, Result};
use crate::numkit::{axpy, dot, l2_norm, ParamVector};
use crate::oracle::GradientOracle;
use crate::optim::buffers::{fim_y, h0_diag, AccumGradSquares, CurvatureBuffer, FimBuffer};
use crate::optim::two_loop::two_loop_direction;
use crate::optim::{Hyperparams, StepReport};

#[derive(Debug)]
pub struct AdaqnState {
    pub w: ParamVector,
    /// Previous aggregated iterate (rollback target).
    pub w_old: ParamVector,
    /// Running sum of pre-update iterates within the current cycle.
    pub w_sum: ParamVector,
    /// Completed aggregation cycles.
    pub t: u64,
    /// Completed iterations.
    pub k: u64,
    pub curvature: CurvatureBuffer,
    pub fim: FimBuffer,
    pub accum: AccumGradSquares,
    pub resets: u64,
    /// Oracle gradient evaluations so far (1 per iteration).
    pub grad_evals: u64,
    /// Oracle loss-only evaluations so far (2 per error-control check).
    pub loss_evals: u64,
}

impl AdaqnState {
    pub fn new(w0: ParamVector, hp: &Hyperparams) -> Result<Self> {
        hp.validate()?;
        let d = w0.len();
        Ok(Self {
            w: w0.clone(),
            w_old: w0,
            w_sum: ParamVector::zeros(d),
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

/// One adaQN iteration: gradient at the current iterate, unnormalized
/// two-loop direction scaled by the learning rate, then the shared
/// aggregation/error-control cycle. Error control runs on the same
/// mini-batch, mirroring the accelerated method for comparability.
pub fn adaqn_step(
    state: &mut AdaqnState,
    hp: &Hyperparams,
    oracle: &mut dyn GradientOracle,
) -> Result<StepReport> {
    let iteration = state.k;

    let (loss, grad) = oracle.loss_grad(&state.w)?;
    state.grad_evals += 1;
    if !loss.is_finite() || !grad.all_finite() {
        return Err(Error::NonFiniteAtIteration {
            what: "loss/gradient",
            iteration,
        });
    }

    state.accum.accumulate(&grad)?;
    let h0 = h0_diag(&state.accum, hp.eps_h0);
    let direction = two_loop_direction(&grad, &state.curvature, &h0)?;
    let direction_norm_pre = l2_norm(&direction);
    let dir_dot_grad = dot(&direction, &grad)?;

    let w_next = axpy(hp.alpha, &direction, &state.w)?;
    state.fim.push(grad);

    state.w_sum.add_scaled(1.0, &state.w)?;
    state.w = w_next;

    let mut reset_triggered = false;
    let mut pair_stored = false;

    if iteration.is_multiple_of(hp.update_every) {
        let w_avg = state.w_sum.scaled(1.0 / hp.update_every as f64);
        state.w_sum.fill(0.0);

        if state.t > 0 {
            let loss_avg = oracle.loss(&w_avg)?;
            let loss_old = oracle.loss(&state.w_old)?;
            state.loss_evals += 2;
            if !loss_avg.is_finite() || !loss_old.is_finite() {
                return Err(Error::NonFiniteAtIteration {
                    what: "aggregated loss",
                    iteration,
                });
            }

            if loss_avg > hp.gamma * loss_old {
                state.curvature.clear();
                state.fim.clear();
                state.w = state.w_old.clone();
                state.resets += 1;
                reset_triggered = true;
            } else {
                let s = axpy(-1.0, &state.w_old, &w_avg)?;
                let y = fim_y(&state.fim, &s)?;
                pair_stored = state.curvature.try_store(s, y, hp.eps_curv)?;
                state.w_old = w_avg;
                state.t += 1;
            }
        } else {
            state.w_old = w_avg;
            state.t += 1;
        }
    }

    state.k += 1;
    Ok(StepReport {
        // adaQN evaluates one gradient per iteration, so the reported loss
        // is the pre-update one that came with it.
        loss,
        direction_norm_pre,
        dir_dot_grad,
        reset_triggered,
        pair_stored,
        mu_after: 0.0,
        buffer_sizes: (state.curvature.len(), state.fim.len()),
    })
}

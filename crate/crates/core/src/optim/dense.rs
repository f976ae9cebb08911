//! Dense inverse-Hessian machinery: the exact rank-two BFGS update and the
//! full-batch Nesterov-accelerated quasi-Newton step built on it. Intended
//! for small dimensions, both as baselines and as the reference oracle the
//! two-loop recursion is validated against.

use crate::error::{Error, Result};
use crate::numkit::{axpy, dot, ParamVector};
use crate::oracle::GradientOracle;

/// Dense symmetric d x d inverse-Hessian approximation, row-major.
#[derive(Debug, Clone)]
pub struct DenseHessian {
    n: usize,
    data: Vec<f64>,
}

impl DenseHessian {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in diag.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn mul_vec(&self, x: &ParamVector) -> Result<ParamVector> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        let mut out = ParamVector::zeros(self.n);
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += row[j] * x[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Exact rank-two inverse-Hessian update
/// `H' = (I - s y'/y's) H (I - y s'/y's) + s s'/y's`,
/// expanded as `H - (s u' + u s')/rho + c s s'` with `u = H y`,
/// `rho = y's`, `c = (y'u)/rho^2 + 1/rho`. The expansion is symmetric
/// term-by-term, so the output is exactly symmetric for symmetric input.
pub fn dense_bfgs_update(h: &DenseHessian, s: &ParamVector, y: &ParamVector) -> Result<DenseHessian> {
    let n = h.dim();
    if s.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: s.len().max(y.len()),
        });
    }
    let rho = dot(y, s)?;
    if rho <= 0.0 {
        return Err(Error::Curvature { sty: rho });
    }
    let u = h.mul_vec(y)?;
    let ytu = dot(y, &u)?;
    let c = ytu / (rho * rho) + 1.0 / rho;

    let mut out = h.clone();
    for i in 0..n {
        for j in 0..n {
            out.data[i * n + j] += -(s[i] * u[j] + u[i] * s[j]) / rho + c * s[i] * s[j];
        }
    }
    Ok(out)
}

/// Full-batch Nesterov-accelerated quasi-Newton state. With `mu = 0` this is
/// plain dense BFGS without line search.
#[derive(Debug)]
pub struct NaqState {
    pub w: ParamVector,
    pub v: ParamVector,
    pub h: DenseHessian,
    pub mu: f64,
    pub alpha: f64,
    pub grad_evals: u64,
}

impl NaqState {
    pub fn new(w0: ParamVector, mu: f64, alpha: f64) -> Self {
        let d = w0.len();
        Self {
            w: w0,
            v: ParamVector::zeros(d),
            h: DenseHessian::identity(d),
            mu,
            alpha,
            grad_evals: 0,
        }
    }
}

/// Outcome of one full-batch step.
#[derive(Debug, Clone, Copy)]
pub struct NaqStepReport {
    /// Loss at the look-ahead point the direction was computed from.
    pub loss: f64,
    /// Whether the (s, y) pair passed the positive-curvature test and the
    /// dense update was applied.
    pub pair_applied: bool,
}

/// One iteration: direction from the dense inverse Hessian at the
/// look-ahead point `w + mu v`, velocity update `v' = mu v + alpha g`,
/// iterate update `w' = w + v'`, then the rank-two update with
/// `s = w' - (w + mu v)` and `y = grad(w') - grad(w + mu v)`, skipped when
/// the pair is inadmissible. Two gradient evaluations per iteration.
pub fn naq_full_batch_step(
    state: &mut NaqState,
    oracle: &mut dyn GradientOracle,
) -> Result<NaqStepReport> {
    let look_ahead = axpy(state.mu, &state.v, &state.w)?;
    let (loss, grad_ahead) = oracle.loss_grad(&look_ahead)?;
    state.grad_evals += 1;

    let mut direction = state.h.mul_vec(&grad_ahead)?;
    direction.scale(-1.0);

    let mut v_next = state.v.scaled(state.mu);
    v_next.add_scaled(state.alpha, &direction)?;
    let w_next = axpy(1.0, &v_next, &state.w)?;

    let (_, grad_next) = oracle.loss_grad(&w_next)?;
    state.grad_evals += 1;

    let s = axpy(-1.0, &look_ahead, &w_next)?;
    let y = axpy(-1.0, &grad_ahead, &grad_next)?;
    let pair_applied = if dot(&y, &s)? > 0.0 {
        state.h = dense_bfgs_update(&state.h, &s, &y)?;
        true
    } else {
        false
    };

    state.w = w_next;
    state.v = v_next;
    Ok(NaqStepReport { loss, pair_applied })
}

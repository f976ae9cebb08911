//! Loss/gradient oracle abstraction: the optimizers only ever see a thing
//! they can query for the mini-batch loss and gradient at an arbitrary point.

use crate::error::Result;
use crate::numkit::{dot, ParamVector};
use crate::rnn::{self, RnnSpec, SequenceBatch};

/// A differentiable objective fixed to one mini-batch (or the full batch for
/// dense methods). Implementations must be pure in `w`.
pub trait GradientOracle {
    /// Parameter dimension `d`.
    fn dim(&self) -> usize;

    /// Objective value at `w`.
    fn loss(&mut self, w: &ParamVector) -> Result<f64>;

    /// Objective value and exact gradient at `w`.
    fn loss_grad(&mut self, w: &ParamVector) -> Result<(f64, ParamVector)>;
}

/// The recurrent network's cross-entropy objective on one batch.
pub struct RnnOracle<'a> {
    spec: &'a RnnSpec,
    batch: &'a SequenceBatch,
}

impl<'a> RnnOracle<'a> {
    pub fn new(spec: &'a RnnSpec, batch: &'a SequenceBatch) -> Self {
        Self { spec, batch }
    }
}

impl GradientOracle for RnnOracle<'_> {
    fn dim(&self) -> usize {
        self.spec.param_count()
    }

    fn loss(&mut self, w: &ParamVector) -> Result<f64> {
        let cache = rnn::forward(w, self.spec, self.batch)?;
        rnn::loss_ce(&cache, self.batch)
    }

    fn loss_grad(&mut self, w: &ParamVector) -> Result<(f64, ParamVector)> {
        rnn::backward(w, self.spec, self.batch)
    }
}

/// Convex quadratic `f(w) = 1/2 w'Aw - b'w` with `A` symmetric positive
/// definite, stored row-major. Small-d test problem for the dense methods.
pub struct QuadraticOracle {
    a: Vec<f64>,
    b: ParamVector,
    n: usize,
}

impl QuadraticOracle {
    pub fn new(a: Vec<f64>, b: ParamVector) -> Self {
        let n = b.len();
        assert_eq!(a.len(), n * n, "A must be n x n");
        Self { a, b, n }
    }

    fn a_times(&self, w: &ParamVector) -> ParamVector {
        let mut out = ParamVector::zeros(self.n);
        for i in 0..self.n {
            let row = &self.a[i * self.n..(i + 1) * self.n];
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += row[j] * w[j];
            }
            out[i] = acc;
        }
        out
    }
}

impl GradientOracle for QuadraticOracle {
    fn dim(&self) -> usize {
        self.n
    }

    fn loss(&mut self, w: &ParamVector) -> Result<f64> {
        let aw = self.a_times(w);
        Ok(0.5 * dot(w, &aw)? - dot(&self.b, w)?)
    }

    fn loss_grad(&mut self, w: &ParamVector) -> Result<(f64, ParamVector)> {
        let mut grad = self.a_times(w);
        let loss = 0.5 * dot(w, &grad)? - dot(&self.b, w)?;
        grad.add_scaled(-1.0, &self.b)?;
        Ok((loss, grad))
    }
}

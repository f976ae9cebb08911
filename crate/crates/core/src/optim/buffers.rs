//! Curvature-pair and gradient FIFO buffers plus the accumulated
//! squared-gradient diagonal they feed.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::numkit::{dot, ParamVector};

/// Displacement/gradient-change pair feeding the limited-memory updates.
#[derive(Debug, Clone)]
pub struct CurvaturePair {
    pub s: ParamVector,
    pub y: ParamVector,
}

/// Admission test: a pair enters the buffer only if `s'y > eps * y'y`.
pub fn curvature_admit(s: &ParamVector, y: &ParamVector, eps_curv: f64) -> Result<bool> {
    let sty = dot(s, y)?;
    let yty = dot(y, y)?;
    Ok(sty > eps_curv * yty)
}

/// FIFO of admitted curvature pairs, oldest first, bounded capacity.
#[derive(Debug)]
pub struct CurvatureBuffer {
    pairs: VecDeque<CurvaturePair>,
    capacity: usize,
}

impl CurvatureBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "curvature buffer capacity must be >= 1");
        Self {
            pairs: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Oldest-to-newest iteration order, matching update application order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &CurvaturePair> + ExactSizeIterator {
        self.pairs.iter()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Runs the admission test and stores the pair if it passes, evicting
    /// the oldest entry at capacity. Returns whether the pair was stored.
    pub fn try_store(&mut self, s: ParamVector, y: ParamVector, eps_curv: f64) -> Result<bool> {
        if !curvature_admit(&s, &y, eps_curv)? {
            return Ok(false);
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back(CurvaturePair { s, y });
        Ok(true)
    }
}

/// FIFO of raw past gradients (never outer-product matrices), bounded
/// capacity, oldest evicted first.
#[derive(Debug)]
pub struct FimBuffer {
    grads: VecDeque<ParamVector>,
    capacity: usize,
}

impl FimBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "gradient buffer capacity must be >= 1");
        Self {
            grads: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &ParamVector> {
        self.grads.iter()
    }

    pub fn push(&mut self, grad: ParamVector) {
        if self.grads.len() == self.capacity {
            self.grads.pop_front();
        }
        self.grads.push_back(grad);
    }

    pub fn clear(&mut self) {
        self.grads.clear();
    }
}

/// Gradient-change vector implied by the averaged outer products of the
/// stored gradients: `y = (1/|F|) sum_i g_i (g_i' s)`, computed without ever
/// materializing a d x d matrix.
pub fn fim_y(fim: &FimBuffer, s: &ParamVector) -> Result<ParamVector> {
    if fim.is_empty() {
        return Err(Error::EmptyFimBuffer);
    }
    let mut y = ParamVector::zeros(s.len());
    for g in fim.iter() {
        let coeff = dot(g, s)?;
        y.add_scaled(coeff, g)?;
    }
    y.scale(1.0 / fim.len() as f64);
    Ok(y)
}

/// Running elementwise sum of squared gradients. Never reset: error-control
/// resets clear the curvature buffers only.
#[derive(Debug, Clone)]
pub struct AccumGradSquares {
    sums: Vec<f64>,
}

impl AccumGradSquares {
    pub fn new(dim: usize) -> Self {
        Self {
            sums: vec![0.0; dim],
        }
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn accumulate(&mut self, grad: &ParamVector) -> Result<()> {
        if grad.len() != self.sums.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sums.len(),
                actual: grad.len(),
            });
        }
        for (acc, g) in self.sums.iter_mut().zip(grad.iter()) {
            *acc += g * g;
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sums
    }
}

/// Diagonal seed for the two-loop recursion: `1 / sqrt(accum_i + eps)`
/// elementwise. Positive and finite for any nonnegative accumulator.
pub fn h0_diag(accum: &AccumGradSquares, eps_h0: f64) -> ParamVector {
    let mut out = ParamVector::zeros(accum.len());
    for (o, &a) in out.as_mut_slice().iter_mut().zip(accum.as_slice().iter()) {
        *o = 1.0 / (a + eps_h0).sqrt();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{sample_normal, SeededRng};

    fn pv(xs: &[f64]) -> ParamVector {
        ParamVector::from_vec(xs.to_vec()).unwrap()
    }

    #[test]
    fn admit_accepts_positive_curvature() {
        assert!(curvature_admit(&pv(&[1.0, 0.0]), &pv(&[1.0, 0.0]), 1e-8).unwrap());
    }

    #[test]
    fn admit_rejects_negative_curvature() {
        assert!(!curvature_admit(&pv(&[1.0, 0.0]), &pv(&[-1.0, 0.0]), 1e-8).unwrap());
    }

    #[test]
    fn admit_rejects_zero_s() {
        assert!(!curvature_admit(&pv(&[0.0, 0.0]), &pv(&[1.0, 2.0]), 1e-8).unwrap());
    }

    #[test]
    fn buffer_evicts_oldest_at_capacity() {
        let mut buf = CurvatureBuffer::new(2);
        for k in 0..3 {
            let stored = buf
                .try_store(pv(&[k as f64 + 1.0, 0.0]), pv(&[1.0, 0.0]), 1e-8)
                .unwrap();
            assert!(stored);
        }
        assert_eq!(buf.len(), 2);
        let firsts: Vec<f64> = buf.iter().map(|p| p.s[0]).collect();
        assert_eq!(firsts, vec![2.0, 3.0]);
    }

    #[test]
    fn buffer_refuses_inadmissible_pair() {
        let mut buf = CurvatureBuffer::new(2);
        let stored = buf
            .try_store(pv(&[1.0, 0.0]), pv(&[-1.0, 0.0]), 1e-8)
            .unwrap();
        assert!(!stored);
        assert!(buf.is_empty());
    }

    #[test]
    fn fim_buffer_fifo_semantics() {
        let mut fim = FimBuffer::new(2);
        fim.push(pv(&[1.0]));
        fim.push(pv(&[2.0]));
        fim.push(pv(&[3.0]));
        let vals: Vec<f64> = fim.iter().map(|g| g[0]).collect();
        assert_eq!(vals, vec![2.0, 3.0]);
        fim.clear();
        assert!(fim.is_empty());
    }

    #[test]
    fn fim_y_single_unit_gradient() {
        let mut fim = FimBuffer::new(4);
        fim.push(pv(&[1.0, 0.0]));
        let y = fim_y(&fim, &pv(&[1.0, 0.0])).unwrap();
        assert_eq!(y, pv(&[1.0, 0.0]));
    }

    #[test]
    fn fim_y_hand_case() {
        // F = {(1,0), (0,2)}, s = (1,1): y = ((1,0)*1 + (0,2)*2)/2 = (0.5, 2).
        let mut fim = FimBuffer::new(4);
        fim.push(pv(&[1.0, 0.0]));
        fim.push(pv(&[0.0, 2.0]));
        let y = fim_y(&fim, &pv(&[1.0, 1.0])).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-15);
        assert!((y[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn fim_y_zero_s_gives_zero() {
        let mut fim = FimBuffer::new(4);
        fim.push(pv(&[1.0, 2.0]));
        let y = fim_y(&fim, &ParamVector::zeros(2)).unwrap();
        assert_eq!(y, ParamVector::zeros(2));
    }

    #[test]
    fn fim_y_empty_errors() {
        let fim = FimBuffer::new(4);
        assert!(matches!(
            fim_y(&fim, &pv(&[1.0])),
            Err(Error::EmptyFimBuffer)
        ));
    }

    #[test]
    fn fim_y_matches_dense_outer_product() {
        let mut rng = SeededRng::new(17);
        for _ in 0..20 {
            let d = 2 + (rng.below(19)) as usize;
            let mut fim = FimBuffer::new(10);
            let count = 1 + rng.below(10) as usize;
            let mut grads = Vec::new();
            for _ in 0..count {
                let g = sample_normal(&mut rng, 0.0, 1.0, d).unwrap();
                fim.push(g.clone());
                grads.push(g);
            }
            let s = sample_normal(&mut rng, 0.0, 1.0, d).unwrap();
            // Dense oracle: build (1/|F|) sum g g' explicitly and multiply.
            let mut dense = vec![0.0; d * d];
            for g in &grads {
                for i in 0..d {
                    for j in 0..d {
                        dense[i * d + j] += g[i] * g[j] / count as f64;
                    }
                }
            }
            let mut want = ParamVector::zeros(d);
            for i in 0..d {
                let mut acc = 0.0;
                for j in 0..d {
                    acc += dense[i * d + j] * s[j];
                }
                want[i] = acc;
            }
            let got = fim_y(&fim, &s).unwrap();
            for i in 0..d {
                assert!(
                    (got[i] - want[i]).abs() <= 1e-12 * want[i].abs().max(1.0),
                    "component {i}: {} vs {}",
                    got[i],
                    want[i]
                );
            }
        }
    }

    #[test]
    fn accum_is_monotone_and_h0_analytic() {
        let mut accum = AccumGradSquares::new(2);
        // Zero accumulator with eps 1e-8: every diagonal entry is 1e4.
        let h0 = h0_diag(&accum, 1e-8);
        assert!((h0[0] - 1e4).abs() < 1e-9);

        // accum_0 = 4; in the eps -> 0 limit the entry tends to 1/sqrt(4).
        accum.accumulate(&pv(&[2.0, 0.0])).unwrap();
        let h0 = h0_diag(&accum, 1e-300);
        assert!((h0[0] - 0.5).abs() < 1e-12);

        let before: Vec<f64> = accum.as_slice().to_vec();
        accum.accumulate(&pv(&[1.0, 3.0])).unwrap();
        for (b, a) in before.iter().zip(accum.as_slice()) {
            assert!(a >= b);
        }
    }

    #[test]
    fn h0_matches_scalar_loop() {
        let mut rng = SeededRng::new(23);
        let mut accum = AccumGradSquares::new(50);
        for _ in 0..5 {
            accum
                .accumulate(&sample_normal(&mut rng, 0.0, 1.0, 50).unwrap())
                .unwrap();
        }
        let eps = 1e-8;
        let h0 = h0_diag(&accum, eps);
        for i in 0..50 {
            let want = 1.0 / (accum.as_slice()[i] + eps).sqrt();
            assert!((h0[i] - want).abs() <= 1e-14 * want);
        }
    }
}

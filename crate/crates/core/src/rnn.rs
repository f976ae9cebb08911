//! Single-layer recurrent network (tanh hidden state, softmax readout from
//! the final hidden state) with exact backpropagation through time.

// The forward/backward kernels index in lockstep across several buffers;
// explicit indices read better than nested zips here.
#![allow(clippy::needless_range_loop)]
//!
//! The network is deliberately minimal: it exists to serve loss and gradient
//! evaluations to the optimizers. All parameters live in one flat
//! [`ParamVector`] laid out as `[W_xh | W_hh | b_h | W_ho | b_o]`, each block
//! row-major.

use crate::error::{Error, Result};
use crate::numkit::{axpy, sample_normal, ParamVector, SeededRng};

/// Network shape: input width per step, hidden units, output classes, and
/// sequence length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RnnSpec {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    pub seq_len: usize,
}

impl RnnSpec {
    pub fn new(n_in: usize, n_hidden: usize, n_out: usize, seq_len: usize) -> Result<Self> {
        if n_in == 0 || n_hidden == 0 || n_out == 0 || seq_len == 0 {
            return Err(Error::InvalidParameter(
                "RnnSpec: all dimensions must be >= 1".into(),
            ));
        }
        Ok(Self {
            n_in,
            n_hidden,
            n_out,
            seq_len,
        })
    }

    /// Total flat parameter count.
    pub fn param_count(&self) -> usize {
        let (ni, h, no) = (self.n_in, self.n_hidden, self.n_out);
        ni * h + h * h + h + h * no + no
    }
}

/// One mini-batch of fixed-length sequences with integer class targets.
/// Inputs are stored row-major as `[batch][seq_len][n_in]`.
#[derive(Debug, Clone)]
pub struct SequenceBatch {
    inputs: Vec<f64>,
    targets: Vec<usize>,
    seq_len: usize,
    n_in: usize,
}

impl SequenceBatch {
    pub fn new(inputs: Vec<f64>, targets: Vec<usize>, seq_len: usize, n_in: usize) -> Result<Self> {
        let batch = targets.len();
        if batch == 0 {
            return Err(Error::InvalidParameter(
                "SequenceBatch: batch must be >= 1".into(),
            ));
        }
        if inputs.len() != batch * seq_len * n_in {
            return Err(Error::DimensionMismatch {
                expected: batch * seq_len * n_in,
                actual: inputs.len(),
            });
        }
        if inputs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "SequenceBatch inputs",
            });
        }
        Ok(Self {
            inputs,
            targets,
            seq_len,
            n_in,
        })
    }

    pub fn batch_size(&self) -> usize {
        self.targets.len()
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn target(&self, p: usize) -> usize {
        self.targets[p]
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Input slice for sample `p` at time step `t`.
    pub fn input(&self, p: usize, t: usize) -> &[f64] {
        let off = (p * self.seq_len + t) * self.n_in;
        &self.inputs[off..off + self.n_in]
    }
}

/// Everything the forward pass produces: per-step hidden states (slot 0 is
/// the zero initial state), final logits, and softmax probabilities.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    hidden: Vec<f64>, // [batch][seq_len + 1][n_hidden]
    logits: Vec<f64>, // [batch][n_out]
    probs: Vec<f64>,  // [batch][n_out]
    batch: usize,
    seq_len: usize,
    n_hidden: usize,
    n_out: usize,
}

impl ForwardCache {
    pub fn probs(&self, p: usize) -> &[f64] {
        &self.probs[p * self.n_out..(p + 1) * self.n_out]
    }

    pub fn logits(&self, p: usize) -> &[f64] {
        &self.logits[p * self.n_out..(p + 1) * self.n_out]
    }

    /// Hidden state after step `t`; `t = 0` is the initial (zero) state.
    pub fn hidden(&self, p: usize, t: usize) -> &[f64] {
        let off = (p * (self.seq_len + 1) + t) * self.n_hidden;
        &self.hidden[off..off + self.n_hidden]
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }
}

/// Borrowed views of the five parameter blocks inside a flat vector.
struct Blocks<'a> {
    w_xh: &'a [f64],
    w_hh: &'a [f64],
    b_h: &'a [f64],
    w_ho: &'a [f64],
    b_o: &'a [f64],
}

fn split_blocks<'a>(spec: &RnnSpec, params: &'a [f64]) -> Blocks<'a> {
    let (ni, h, no) = (spec.n_in, spec.n_hidden, spec.n_out);
    let (w_xh, rest) = params.split_at(h * ni);
    let (w_hh, rest) = rest.split_at(h * h);
    let (b_h, rest) = rest.split_at(h);
    let (w_ho, b_o) = rest.split_at(no * h);
    Blocks {
        w_xh,
        w_hh,
        b_h,
        w_ho,
        b_o,
    }
}

struct BlocksMut<'a> {
    w_xh: &'a mut [f64],
    w_hh: &'a mut [f64],
    b_h: &'a mut [f64],
    w_ho: &'a mut [f64],
    b_o: &'a mut [f64],
}

fn split_blocks_mut<'a>(spec: &RnnSpec, params: &'a mut [f64]) -> BlocksMut<'a> {
    let (ni, h, no) = (spec.n_in, spec.n_hidden, spec.n_out);
    let (w_xh, rest) = params.split_at_mut(h * ni);
    let (w_hh, rest) = rest.split_at_mut(h * h);
    let (b_h, rest) = rest.split_at_mut(h);
    let (w_ho, b_o) = rest.split_at_mut(no * h);
    BlocksMut {
        w_xh,
        w_hh,
        b_h,
        w_ho,
        b_o,
    }
}

fn check_shapes(params: &ParamVector, spec: &RnnSpec, batch: &SequenceBatch) -> Result<()> {
    let d = spec.param_count();
    if params.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: params.len(),
        });
    }
    if batch.n_in() != spec.n_in || batch.seq_len() != spec.seq_len {
        return Err(Error::DimensionMismatch {
            expected: spec.seq_len * spec.n_in,
            actual: batch.seq_len() * batch.n_in(),
        });
    }
    if let Some(&bad) = batch.targets().iter().find(|&&c| c >= spec.n_out) {
        return Err(Error::InvalidParameter(format!(
            "target class {bad} out of range for {} outputs",
            spec.n_out
        )));
    }
    Ok(())
}

/// Draws all `d` parameters (weights and biases alike) from N(0, 0.01^2).
pub fn init_params(spec: &RnnSpec, rng: &mut SeededRng) -> Result<ParamVector> {
    sample_normal(rng, 0.0, 0.01, spec.param_count())
}

/// Runs the network over a batch: `h_t = tanh(W_xh x_t + W_hh h_{t-1} + b_h)`
/// with `h_0 = 0`, logits read from the final hidden state, probabilities by
/// numerically stabilized softmax.
pub fn forward(params: &ParamVector, spec: &RnnSpec, batch: &SequenceBatch) -> Result<ForwardCache> {
    check_shapes(params, spec, batch)?;
    let (ni, h, no, t_len) = (spec.n_in, spec.n_hidden, spec.n_out, spec.seq_len);
    let b = batch.batch_size();
    let blocks = split_blocks(spec, params.as_slice());

    let mut hidden = vec![0.0; b * (t_len + 1) * h];
    let mut logits = vec![0.0; b * no];
    let mut probs = vec![0.0; b * no];

    for p in 0..b {
        let base = p * (t_len + 1) * h;
        for t in 0..t_len {
            let x = batch.input(p, t);
            let (prev, cur) = hidden[base..].split_at_mut((t + 1) * h);
            let h_prev = &prev[t * h..(t + 1) * h];
            let h_cur = &mut cur[..h];
            for i in 0..h {
                let mut a = blocks.b_h[i];
                let wx = &blocks.w_xh[i * ni..(i + 1) * ni];
                for j in 0..ni {
                    a += wx[j] * x[j];
                }
                let wh = &blocks.w_hh[i * h..(i + 1) * h];
                for j in 0..h {
                    a += wh[j] * h_prev[j];
                }
                h_cur[i] = a.tanh();
            }
        }
        let h_last = &hidden[base + t_len * h..base + (t_len + 1) * h];
        let lg = &mut logits[p * no..(p + 1) * no];
        for o in 0..no {
            let mut a = blocks.b_o[o];
            let wo = &blocks.w_ho[o * h..(o + 1) * h];
            for j in 0..h {
                a += wo[j] * h_last[j];
            }
            lg[o] = a;
        }
        let max = lg.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::NonFinite {
                context: "forward logits",
            });
        }
        let pr = &mut probs[p * no..(p + 1) * no];
        let mut sum = 0.0;
        for o in 0..no {
            pr[o] = (lg[o] - max).exp();
            sum += pr[o];
        }
        for o in 0..no {
            pr[o] /= sum;
        }
    }

    Ok(ForwardCache {
        hidden,
        logits,
        probs,
        batch: b,
        seq_len: t_len,
        n_hidden: h,
        n_out: no,
    })
}

/// Floor for probabilities before taking logs, so saturated outputs cannot
/// produce an infinite loss.
const PROB_FLOOR: f64 = 1e-12;

/// Mean cross-entropy over the batch: `(1/b) sum_p -log p(target_p)`.
pub fn loss_ce(cache: &ForwardCache, batch: &SequenceBatch) -> Result<f64> {
    if cache.batch_size() != batch.batch_size() {
        return Err(Error::DimensionMismatch {
            expected: cache.batch_size(),
            actual: batch.batch_size(),
        });
    }
    let b = batch.batch_size();
    let mut total = 0.0;
    for p in 0..b {
        let prob = cache.probs(p)[batch.target(p)].max(PROB_FLOOR);
        total -= prob.ln();
    }
    Ok(total / b as f64)
}

/// Mean squared error between the probability vector and the one-hot target,
/// averaged over classes and batch. This is the reported metric for the
/// counting task; training still minimizes cross-entropy.
pub fn loss_mse(cache: &ForwardCache, batch: &SequenceBatch) -> Result<f64> {
    if cache.batch_size() != batch.batch_size() {
        return Err(Error::DimensionMismatch {
            expected: cache.batch_size(),
            actual: batch.batch_size(),
        });
    }
    let b = batch.batch_size();
    let no = cache.n_out;
    let mut total = 0.0;
    for p in 0..b {
        let probs = cache.probs(p);
        let target = batch.target(p);
        for (c, &prob) in probs.iter().enumerate() {
            let want = if c == target { 1.0 } else { 0.0 };
            let diff = prob - want;
            total += diff * diff;
        }
    }
    Ok(total / (b * no) as f64)
}

/// Fraction of samples whose argmax probability hits the target class.
pub fn accuracy(cache: &ForwardCache, batch: &SequenceBatch) -> f64 {
    let b = batch.batch_size();
    let mut correct = 0usize;
    for p in 0..b {
        let probs = cache.probs(p);
        let mut best = 0usize;
        for (c, &v) in probs.iter().enumerate() {
            if v > probs[best] {
                best = c;
            }
        }
        if best == batch.target(p) {
            correct += 1;
        }
    }
    correct as f64 / b as f64
}

/// Cross-entropy loss and its exact gradient over the full unrolled
/// sequence, averaged over the batch. No truncation, no clipping.
pub fn backward(
    params: &ParamVector,
    spec: &RnnSpec,
    batch: &SequenceBatch,
) -> Result<(f64, ParamVector)> {
    let cache = forward(params, spec, batch)?;
    let (ni, h, no, t_len) = (spec.n_in, spec.n_hidden, spec.n_out, spec.seq_len);
    let b = batch.batch_size();
    let blocks = split_blocks(spec, params.as_slice());

    let mut grad = ParamVector::zeros(spec.param_count());
    let mut loss = 0.0;
    {
        let g = split_blocks_mut(spec, grad.as_mut_slice());
        let mut dlogit = vec![0.0; no];
        let mut dh = vec![0.0; h];
        let mut da = vec![0.0; h];
        let mut dh_next = vec![0.0; h];

        for p in 0..b {
            let probs = cache.probs(p);
            let target = batch.target(p);
            loss -= probs[target].max(PROB_FLOOR).ln();

            for o in 0..no {
                dlogit[o] = probs[o] - if o == target { 1.0 } else { 0.0 };
            }
            let h_last = cache.hidden(p, t_len);
            dh.fill(0.0);
            for o in 0..no {
                let d = dlogit[o];
                g.b_o[o] += d;
                let row = &mut g.w_ho[o * h..(o + 1) * h];
                for j in 0..h {
                    row[j] += d * h_last[j];
                }
                let wo = &blocks.w_ho[o * h..(o + 1) * h];
                for j in 0..h {
                    dh[j] += wo[j] * d;
                }
            }

            for t in (1..=t_len).rev() {
                let h_t = cache.hidden(p, t);
                let h_prev = cache.hidden(p, t - 1);
                let x = batch.input(p, t - 1);
                for i in 0..h {
                    da[i] = dh[i] * (1.0 - h_t[i] * h_t[i]);
                }
                dh_next.fill(0.0);
                for i in 0..h {
                    let d = da[i];
                    g.b_h[i] += d;
                    let gx = &mut g.w_xh[i * ni..(i + 1) * ni];
                    for j in 0..ni {
                        gx[j] += d * x[j];
                    }
                    let gh = &mut g.w_hh[i * h..(i + 1) * h];
                    for j in 0..h {
                        gh[j] += d * h_prev[j];
                    }
                    let wh = &blocks.w_hh[i * h..(i + 1) * h];
                    for j in 0..h {
                        dh_next[j] += wh[j] * d;
                    }
                }
                std::mem::swap(&mut dh, &mut dh_next);
            }
        }
    }

    let inv_b = 1.0 / b as f64;
    grad.scale(inv_b);
    loss *= inv_b;

    if !loss.is_finite() || !grad.all_finite() {
        return Err(Error::NonFinite {
            context: "backward loss/gradient",
        });
    }
    Ok((loss, grad))
}

/// Loss and gradient at the shifted point `w + mu * v`, leaving `w` intact.
pub fn grad_at_shifted(
    params: &ParamVector,
    v: &ParamVector,
    mu: f64,
    spec: &RnnSpec,
    batch: &SequenceBatch,
) -> Result<(f64, ParamVector)> {
    let shifted = axpy(mu, v, params)?;
    backward(&shifted, spec, batch)
}

/// Compares the analytic gradient against central finite differences
/// (step 1e-5) component-wise and returns the maximum relative error
/// `|a - n| / max(1, |a| + |n|)`. `corruption` is a test hook added to the
/// first analytic component so negative controls can prove the check bites.
pub fn grad_check_with_corruption(
    spec: &RnnSpec,
    batch: &SequenceBatch,
    rng: &mut SeededRng,
    corruption: f64,
) -> Result<f64> {
    const STEP: f64 = 1e-5;
    let params = init_params(spec, rng)?;
    let (_, mut analytic) = backward(&params, spec, batch)?;
    analytic[0] += corruption;

    let mut probe = params.clone();
    let mut max_rel = 0.0f64;
    for i in 0..params.len() {
        let orig = probe[i];
        probe[i] = orig + STEP;
        let up = loss_ce(&forward(&probe, spec, batch)?, batch)?;
        probe[i] = orig - STEP;
        let down = loss_ce(&forward(&probe, spec, batch)?, batch)?;
        probe[i] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        let rel = (analytic[i] - numeric).abs() / (analytic[i].abs() + numeric.abs()).max(1.0);
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(max_rel)
}

/// Finite-difference validation of [`backward`]; see
/// [`grad_check_with_corruption`] for the error measure.
pub fn grad_check(spec: &RnnSpec, batch: &SequenceBatch, rng: &mut SeededRng) -> Result<f64> {
    grad_check_with_corruption(spec, batch, rng, 0.0)
}

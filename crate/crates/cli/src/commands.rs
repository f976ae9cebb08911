//! Verification subcommands: finite-difference gradient checking, dense
//! oracle equivalence for the two-loop direction and the FIFO-implied `y`
//! product, and the cost table.

use asnaq_core::numkit::{l2_norm, sample_normal, ParamVector, SeededRng};
use asnaq_core::optim::{
    cost_model, dense_bfgs_update, fim_y, two_loop_direction, Algorithm, CostModelInput,
    CostReport, CurvatureBuffer, DenseHessian, FimBuffer,
};
use asnaq_core::rnn::{grad_check_with_corruption, RnnSpec, SequenceBatch};
use asnaq_core::Result;

/// One gradient-check row: sequence length, measured error, pass threshold.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckRow {
    pub seq_len: usize,
    pub max_rel_error: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub rows: Vec<GradCheckRow>,
}

impl GradCheckReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.max_rel_error < r.threshold)
    }
}

/// Runs the finite-difference check over the sequence-length grid
/// {1, 5, 20, 50} on a small network. Long unrolls amplify higher-order
/// terms, so the T = 50 case gets the looser threshold.
pub fn grad_check_grid(seed: u64, corruption: f64) -> Result<GradCheckReport> {
    let mut rows = Vec::new();
    for &seq_len in &[1usize, 5, 20, 50] {
        let spec = RnnSpec::new(2, 5, 3, seq_len)?;
        let mut data_rng = SeededRng::new(seed).derive(seq_len as u64);
        let batch_size = 4;
        let inputs = sample_normal(&mut data_rng, 0.0, 1.0, batch_size * seq_len * spec.n_in)?;
        let targets = (0..batch_size).map(|p| p % spec.n_out).collect();
        let batch = SequenceBatch::new(inputs.as_slice().to_vec(), targets, seq_len, spec.n_in)?;
        let mut param_rng = SeededRng::new(seed).derive(1000 + seq_len as u64);
        let max_rel_error = grad_check_with_corruption(&spec, &batch, &mut param_rng, corruption)?;
        let threshold = if seq_len >= 50 { 1e-4 } else { 1e-5 };
        rows.push(GradCheckRow {
            seq_len,
            max_rel_error,
            threshold,
        });
    }
    Ok(GradCheckReport { rows })
}

#[derive(Debug, Clone, Copy)]
pub struct OracleCheckReport {
    /// Worst relative deviation between the two-loop direction and the dense
    /// rank-two-update oracle over the random trials.
    pub two_loop_max_dev: f64,
    /// Worst deviation between the FIFO-implied `y` and the explicit
    /// outer-product-matrix product.
    pub fim_max_dev: f64,
    /// Empty-buffer direction equals `-h0 .* grad` exactly.
    pub empty_buffer_exact: bool,
    /// Single-pair worked example lands on (-0.5, -1).
    pub worked_example_ok: bool,
}

impl OracleCheckReport {
    pub fn all_pass(&self) -> bool {
        self.two_loop_max_dev < 1e-9
            && self.fim_max_dev < 1e-9
            && self.empty_buffer_exact
            && self.worked_example_ok
    }
}

/// Dense reference direction: seed a diagonal matrix, fold every buffered
/// pair through the exact rank-two update in storage order, multiply.
fn dense_direction(grad: &ParamVector, buf: &CurvatureBuffer, h0: &ParamVector) -> Result<ParamVector> {
    let mut h = DenseHessian::from_diagonal(h0.as_slice());
    for pair in buf.iter() {
        h = dense_bfgs_update(&h, &pair.s, &pair.y)?;
    }
    let mut dir = h.mul_vec(grad)?;
    dir.scale(-1.0);
    Ok(dir)
}

fn positive_diag(rng: &mut SeededRng, d: usize) -> Result<ParamVector> {
    let mut h = sample_normal(rng, 0.0, 1.0, d)?;
    for v in h.as_mut_slice() {
        *v = v.abs() + 0.1;
    }
    Ok(h)
}

/// Cross-validates the limited-memory path against dense linear algebra:
/// `trials` random buffers (d <= 10, up to 5 admissible pairs, random
/// positive diagonal seed) for the two-loop direction, and `trials` random
/// gradient FIFOs (d <= 20, up to 10 entries) for the implied-y product.
pub fn oracle_check(seed: u64, trials: usize) -> Result<OracleCheckReport> {
    let mut rng = SeededRng::new(seed);

    let mut two_loop_max_dev = 0.0f64;
    for _ in 0..trials {
        let d = 2 + rng.below(9) as usize; // 2..=10
        let n_pairs = rng.below(6) as usize; // 0..=5
        let mut buf = CurvatureBuffer::new(5.max(n_pairs));
        let mut stored = 0;
        while stored < n_pairs {
            let s = sample_normal(&mut rng, 0.0, 1.0, d)?;
            let y = sample_normal(&mut rng, 0.0, 1.0, d)?;
            if buf.try_store(s, y, 1e-8)? {
                stored += 1;
            }
        }
        let h0 = positive_diag(&mut rng, d)?;
        let grad = sample_normal(&mut rng, 0.0, 1.0, d)?;
        let fast = two_loop_direction(&grad, &buf, &h0)?;
        let slow = dense_direction(&grad, &buf, &h0)?;
        let mut diff = fast;
        diff.add_scaled(-1.0, &slow)?;
        let dev = l2_norm(&diff) / l2_norm(&slow).max(1.0);
        two_loop_max_dev = two_loop_max_dev.max(dev);
    }

    let mut fim_max_dev = 0.0f64;
    for _ in 0..trials {
        let d = 2 + rng.below(19) as usize; // 2..=20
        let count = 1 + rng.below(10) as usize; // 1..=10
        let mut fim = FimBuffer::new(count);
        let mut grads = Vec::new();
        for _ in 0..count {
            let g = sample_normal(&mut rng, 0.0, 1.0, d)?;
            fim.push(g.clone());
            grads.push(g);
        }
        let s = sample_normal(&mut rng, 0.0, 1.0, d)?;
        // Explicit outer-product matrix, then a dense matrix-vector product.
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
        let got = fim_y(&fim, &s)?;
        let mut diff = got;
        diff.add_scaled(-1.0, &want)?;
        let dev = l2_norm(&diff) / l2_norm(&want).max(1.0);
        fim_max_dev = fim_max_dev.max(dev);
    }

    // Degenerate case: with no pairs the direction is exactly -h0 .* grad.
    let d = 6;
    let h0 = positive_diag(&mut rng, d)?;
    let grad = sample_normal(&mut rng, 0.0, 1.0, d)?;
    let empty = CurvatureBuffer::new(5);
    let dir = two_loop_direction(&grad, &empty, &h0)?;
    let mut empty_buffer_exact = true;
    for i in 0..d {
        if dir[i] != -(h0[i] * grad[i]) {
            empty_buffer_exact = false;
        }
    }

    // Worked single-pair example.
    let mut buf = CurvatureBuffer::new(5);
    buf.try_store(
        ParamVector::from_vec(vec![1.0, 0.0])?,
        ParamVector::from_vec(vec![2.0, 0.0])?,
        1e-8,
    )?;
    let ones = ParamVector::from_vec(vec![1.0, 1.0])?;
    let g = two_loop_direction(&ones, &buf, &ParamVector::from_vec(vec![1.0, 1.0])?)?;
    let worked_example_ok = (g[0] + 0.5).abs() < 1e-12 && (g[1] + 1.0).abs() < 1e-12;

    Ok(OracleCheckReport {
        two_loop_max_dev,
        fim_max_dev,
        empty_buffer_exact,
        worked_example_ok,
    })
}

/// All four algorithms' compute and storage costs for one input tuple.
pub fn cost_table(n: u64, b: u64, d: u64, m_l: u64, m_f: u64, l: u64, zeta: u64) -> Vec<(Algorithm, CostReport)> {
    [Algorithm::Bfgs, Algorithm::Naq, Algorithm::Adaqn, Algorithm::Asnaq]
        .into_iter()
        .map(|algorithm| {
            let report = cost_model(&CostModelInput {
                algorithm,
                n,
                b,
                d,
                m_l,
                m_f,
                l,
                zeta,
            });
            (algorithm, report)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grad_check_grid_passes_cleanly() {
        let report = grad_check_grid(7, 0.0).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.all_pass(), "{:?}", report.rows);
    }

    #[test]
    fn grad_check_grid_catches_corruption() {
        let report = grad_check_grid(7, 1e-2).unwrap();
        assert!(!report.all_pass());
    }

    #[test]
    fn oracle_check_is_tight() {
        let report = oracle_check(11, 100).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert!(report.two_loop_max_dev < 1e-10);
        assert!(report.fim_max_dev < 1e-12);
    }

    #[test]
    fn cost_table_has_benchmark_values() {
        let table = cost_table(60_000, 128, 1000, 10, 100, 5, 1);
        let asnaq = table.iter().find(|(a, _)| *a == Algorithm::Asnaq).unwrap();
        assert_eq!(asnaq.1.compute, 425_400);
        let adaqn = table.iter().find(|(a, _)| *a == Algorithm::Adaqn).unwrap();
        assert_eq!(adaqn.1.compute, 296_400);
    }
}

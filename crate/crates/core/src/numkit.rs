//! Flat-vector algebra and seeded randomness used by every other module.
//!
//! Everything is 64-bit. Random draws go through [`SeededRng`], a ChaCha8
//! stream combined with fixed, hand-written conversions (53-bit uniform,
//! Marsaglia polar normal, rejection-sampled bounded integers), so a given
//! seed reproduces the exact same bytes on every platform and every run.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Flat vector of 64-bit reals; the universal currency between the model,
/// the optimizers, and the harness. Entries are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
}

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    /// Wraps a raw vector, rejecting NaN/Inf entries.
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "ParamVector::from_vec",
            });
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// In-place `self += c * x`.
    pub fn add_scaled(&mut self, c: f64, x: &ParamVector) -> Result<()> {
        check_len(self.len(), x.len())?;
        for (a, b) in self.values.iter_mut().zip(x.values.iter()) {
            *a += c * b;
        }
        Ok(())
    }

    /// In-place `self *= c`.
    pub fn scale(&mut self, c: f64) {
        for a in &mut self.values {
            *a *= c;
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.values.fill(v);
    }

    /// Returns `self * c` as a new vector.
    pub fn scaled(&self, c: f64) -> ParamVector {
        let mut out = self.clone();
        out.scale(c);
        out
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl std::ops::IndexMut<usize> for ParamVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(Error::DimensionMismatch { expected, actual })
    } else {
        Ok(())
    }
}

/// Inner product `sum_i a_i b_i`.
pub fn dot(a: &ParamVector, b: &ParamVector) -> Result<f64> {
    check_len(a.len(), b.len())?;
    Ok(a.values
        .iter()
        .zip(b.values.iter())
        .map(|(x, y)| x * y)
        .sum())
}

/// Returns `y + c * x` as a new vector.
pub fn axpy(c: f64, x: &ParamVector, y: &ParamVector) -> Result<ParamVector> {
    check_len(x.len(), y.len())?;
    let values: Vec<f64> = x
        .values
        .iter()
        .zip(y.values.iter())
        .map(|(xi, yi)| yi + c * xi)
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "axpy" });
    }
    Ok(ParamVector { values })
}

/// Euclidean norm; zero only for the zero vector.
pub fn l2_norm(x: &ParamVector) -> f64 {
    x.values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Deterministic pseudo-random source. One master instance per experiment;
/// independent sub-streams come from [`SeededRng::derive`].
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

/// SplitMix64 finalizer; used to spread seeds and derive sub-seeds.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Deterministically derives an independent generator for a tagged
    /// purpose (weight init, shuffling, data generation) from this
    /// generator's seed. Does not consume any of this generator's stream.
    pub fn derive(&self, tag: u64) -> SeededRng {
        SeededRng::new(mix64(
            self.seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15),
        ))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased integer in [0, bound) by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below() needs a positive bound");
        let reject_under = bound.wrapping_neg() % bound; // 2^64 mod bound
        loop {
            let r = self.next_u64();
            if r >= reject_under {
                return r % bound;
            }
        }
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }

    /// Standard normal draw via the Marsaglia polar method. Pairs are
    /// generated together; the spare is cached for the next call.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * f);
                return u * f;
            }
        }
    }
}

/// `n` i.i.d. draws from N(mean, std^2). `std = 0` returns a constant
/// vector without consuming the stream.
pub fn sample_normal(rng: &mut SeededRng, mean: f64, std: f64, n: usize) -> Result<ParamVector> {
    if std < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sample_normal: std must be >= 0, got {std}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample_normal: n must be >= 1".into(),
        ));
    }
    if std == 0.0 {
        return Ok(ParamVector {
            values: vec![mean; n],
        });
    }
    let values = (0..n)
        .map(|_| mean + std * rng.standard_normal())
        .collect();
    Ok(ParamVector { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(xs: &[f64]) -> ParamVector {
        ParamVector::from_vec(xs.to_vec()).unwrap()
    }

    #[test]
    fn dot_orthogonal_is_zero() {
        assert_eq!(dot(&pv(&[1.0, 0.0]), &pv(&[0.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn dot_hand_arithmetic() {
        assert_eq!(dot(&pv(&[1.0, 2.0]), &pv(&[3.0, 4.0])).unwrap(), 11.0);
    }

    #[test]
    fn dot_length_mismatch_errors() {
        let err = dot(&pv(&[1.0]), &pv(&[1.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn dot_matches_scalar_loop_d100() {
        let mut rng = SeededRng::new(7);
        let a = sample_normal(&mut rng, 0.0, 1.0, 100).unwrap();
        let b = sample_normal(&mut rng, 0.0, 1.0, 100).unwrap();
        let mut oracle = 0.0;
        for i in 0..100 {
            oracle += a[i] * b[i];
        }
        let got = dot(&a, &b).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
    }

    #[test]
    fn axpy_zero_coefficient_is_identity() {
        let y = pv(&[2.0, -3.0, 5.0]);
        let x = pv(&[1.0, 1.0, 1.0]);
        assert_eq!(axpy(0.0, &x, &y).unwrap(), y);
    }

    #[test]
    fn axpy_hand_cases() {
        assert_eq!(
            axpy(1.0, &pv(&[1.0, 1.0]), &pv(&[0.0, 0.0])).unwrap(),
            pv(&[1.0, 1.0])
        );
        assert_eq!(
            axpy(-2.0, &pv(&[1.0, 0.0]), &pv(&[3.0, 3.0])).unwrap(),
            pv(&[1.0, 3.0])
        );
    }

    #[test]
    fn axpy_length_mismatch_errors() {
        assert!(axpy(1.0, &pv(&[1.0]), &pv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn l2_norm_cases() {
        assert_eq!(l2_norm(&pv(&[3.0, 4.0])), 5.0);
        assert_eq!(l2_norm(&ParamVector::zeros(4)), 0.0);
        assert_eq!(l2_norm(&pv(&[1.0, 1.0, 1.0, 1.0])), 2.0);
    }

    #[test]
    fn from_vec_rejects_non_finite() {
        assert!(ParamVector::from_vec(vec![1.0, f64::NAN]).is_err());
        assert!(ParamVector::from_vec(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn sample_normal_zero_std_is_constant() {
        let mut rng = SeededRng::new(1);
        let v = sample_normal(&mut rng, 2.5, 0.0, 4).unwrap();
        assert_eq!(v.as_slice(), &[2.5, 2.5, 2.5, 2.5]);
    }

    #[test]
    fn sample_normal_negative_std_errors() {
        let mut rng = SeededRng::new(1);
        assert!(sample_normal(&mut rng, 0.0, -1.0, 4).is_err());
    }

    #[test]
    fn sample_normal_moments() {
        // Law-of-large-numbers check on 1e5 draws from N(0, 0.01^2).
        let mut rng = SeededRng::new(42);
        let n = 100_000;
        let v = sample_normal(&mut rng, 0.0, 0.01, n).unwrap();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        assert!(mean.abs() < 1e-3, "sample mean {mean}");
        assert!((std - 0.01).abs() < 0.05 * 0.01, "sample std {std}");
    }

    #[test]
    fn same_seed_reproduces_stream() {
        let mut a = SeededRng::new(9001);
        let mut b = SeededRng::new(9001);
        let va = sample_normal(&mut a, 0.0, 1.0, 64).unwrap();
        let vb = sample_normal(&mut b, 0.0, 1.0, 64).unwrap();
        assert_eq!(va, vb);
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn derive_is_deterministic_and_distinct() {
        let master = SeededRng::new(5);
        let mut d1 = master.derive(1);
        let mut d1b = master.derive(1);
        let mut d2 = master.derive(2);
        let x1 = d1.next_u64();
        assert_eq!(x1, d1b.next_u64());
        assert_ne!(x1, d2.next_u64());
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = SeededRng::new(3);
        let mut xs: Vec<usize> = (0..257).collect();
        rng.shuffle(&mut xs);
        let mut sorted = xs.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..257).collect::<Vec<_>>());
    }

    #[test]
    fn below_respects_bound() {
        let mut rng = SeededRng::new(11);
        for _ in 0..1000 {
            assert!(rng.below(7) < 7);
        }
    }

    proptest! {
        #[test]
        fn dot_matches_scalar_oracle(xs in proptest::collection::vec(-1e3f64..1e3, 1..64)) {
            let n = xs.len();
            let a = ParamVector::from_vec(xs.clone()).unwrap();
            let b = ParamVector::from_vec(xs.iter().map(|x| x * 0.5 - 1.0).collect()).unwrap();
            let mut oracle = 0.0;
            for i in 0..n {
                oracle += a[i] * b[i];
            }
            let got = dot(&a, &b).unwrap();
            prop_assert!((got - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
        }

        #[test]
        fn axpy_matches_scalar_oracle(
            xs in proptest::collection::vec(-1e3f64..1e3, 1..64),
            c in -10.0f64..10.0,
        ) {
            let n = xs.len();
            let x = ParamVector::from_vec(xs.clone()).unwrap();
            let y = ParamVector::from_vec(xs.iter().map(|v| v - 2.0).collect()).unwrap();
            let got = axpy(c, &x, &y).unwrap();
            for i in 0..n {
                let want = y[i] + c * x[i];
                prop_assert!((got[i] - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }

        #[test]
        fn l2_norm_absolute_homogeneity(
            xs in proptest::collection::vec(-1e3f64..1e3, 1..64),
            c in -10.0f64..10.0,
        ) {
            let x = ParamVector::from_vec(xs).unwrap();
            let lhs = l2_norm(&x.scaled(c));
            let rhs = c.abs() * l2_norm(&x);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }
}

//! Benchmark tasks: binary-string counting sequences, MNIST-format image
//! ingestion, row-wise and pixel-wise sequencers, and deterministic
//! mini-batch planning.

mod idx;
mod synth;

pub use idx::{load_mnist_idx, write_idx_images, write_idx_labels};
pub use synth::synthesize_digits;

use crate::error::{Error, Result};
use crate::numkit::SeededRng;
use crate::rnn::SequenceBatch;

/// A fully materialized sequence-classification dataset: `n` sequences of
/// `seq_len` steps with `n_in` reals per step and one class label each.
#[derive(Debug, Clone)]
pub struct SequenceDataset {
    inputs: Vec<f64>, // [n][seq_len][n_in]
    labels: Vec<usize>,
    seq_len: usize,
    n_in: usize,
    n_out: usize,
}

impl SequenceDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Flat `[seq_len][n_in]` view of one sample.
    pub fn sample(&self, i: usize) -> &[f64] {
        let stride = self.seq_len * self.n_in;
        &self.inputs[i * stride..(i + 1) * stride]
    }

    /// Copies the indexed samples into a contiguous mini-batch.
    pub fn gather(&self, indices: &[usize]) -> Result<SequenceBatch> {
        let stride = self.seq_len * self.n_in;
        let mut inputs = Vec::with_capacity(indices.len() * stride);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidParameter(format!(
                    "sample index {i} out of range for dataset of {}",
                    self.len()
                )));
            }
            inputs.extend_from_slice(self.sample(i));
            targets.push(self.labels[i]);
        }
        SequenceBatch::new(inputs, targets, self.seq_len, self.n_in)
    }
}

/// Generates the sequence-counting task: each step carries one i.i.d.
/// Bernoulli(0.5) bit and the label is the exact count of ones, so there are
/// `seq_len + 1` classes.
pub fn gen_counting(n: usize, seq_len: usize, rng: &mut SeededRng) -> Result<SequenceDataset> {
    if n == 0 || seq_len == 0 {
        return Err(Error::InvalidParameter(
            "gen_counting: n and seq_len must be >= 1".into(),
        ));
    }
    let mut inputs = Vec::with_capacity(n * seq_len);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut ones = 0usize;
        for _ in 0..seq_len {
            let bit = rng.next_u64() >> 63; // top bit, uniform
            ones += bit as usize;
            inputs.push(bit as f64);
        }
        labels.push(ones);
    }
    Ok(SequenceDataset {
        inputs,
        labels,
        seq_len,
        n_in: 1,
        n_out: seq_len + 1,
    })
}

/// Grayscale image dataset with pixels scaled to [0, 1] and digit labels.
#[derive(Debug, Clone)]
pub struct MnistDataset {
    images: Vec<f64>, // [n][height][width]
    labels: Vec<usize>,
    height: usize,
    width: usize,
}

impl MnistDataset {
    pub(crate) fn from_parts(
        images: Vec<f64>,
        labels: Vec<usize>,
        height: usize,
        width: usize,
    ) -> Self {
        debug_assert_eq!(images.len(), labels.len() * height * width);
        Self {
            images,
            labels,
            height,
            width,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Row-major `[height][width]` view of one image.
    pub fn image(&self, i: usize) -> &[f64] {
        let stride = self.height * self.width;
        &self.images[i * stride..(i + 1) * stride]
    }

    /// First `n` samples as an owned dataset.
    pub fn subset(&self, n: usize) -> Result<MnistDataset> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidParameter(format!(
                "subset of {n} from dataset of {}",
                self.len()
            )));
        }
        Ok(MnistDataset {
            images: self.images[..n * self.height * self.width].to_vec(),
            labels: self.labels[..n].to_vec(),
            height: self.height,
            width: self.width,
        })
    }
}

/// Re-lays images as row sequences: time step `t` carries row `t`, so
/// `seq_len = height` and `n_in = width`. The flat layout is identical to
/// the row-major image layout.
pub fn row_sequencer(dataset: &MnistDataset) -> SequenceDataset {
    SequenceDataset {
        inputs: dataset.images.clone(),
        labels: dataset.labels.clone(),
        seq_len: dataset.height,
        n_in: dataset.width,
        n_out: 10,
    }
}

/// Re-lays images as scanline pixel sequences (`n_in = 1`). With
/// `downsample = Some(side)` each image is first reduced to `side x side`
/// by averaging equal blocks, giving `seq_len = side^2`; otherwise
/// `seq_len = height * width`.
pub fn pixel_sequencer(
    dataset: &MnistDataset,
    downsample: Option<usize>,
) -> Result<SequenceDataset> {
    let (h, w) = (dataset.height, dataset.width);
    let (inputs, seq_len) = match downsample {
        None => (dataset.images.clone(), h * w),
        Some(side) => {
            if side == 0 || h != w || h % side != 0 {
                return Err(Error::InvalidParameter(format!(
                    "downsample side {side} must evenly divide square images of {h}x{w}"
                )));
            }
            let block = h / side;
            let norm = 1.0 / (block * block) as f64;
            let mut out = Vec::with_capacity(dataset.len() * side * side);
            for i in 0..dataset.len() {
                let img = dataset.image(i);
                for br in 0..side {
                    for bc in 0..side {
                        let mut acc = 0.0;
                        for r in br * block..(br + 1) * block {
                            for c in bc * block..(bc + 1) * block {
                                acc += img[r * w + c];
                            }
                        }
                        out.push(acc * norm);
                    }
                }
            }
            (out, side * side)
        }
    };
    Ok(SequenceDataset {
        inputs,
        labels: dataset.labels.clone(),
        seq_len,
        n_in: 1,
        n_out: 10,
    })
}

/// One epoch's shuffled index order with fixed-size batches; the trailing
/// short batch is dropped so every batch has exactly `batch_size` samples.
#[derive(Debug, Clone)]
pub struct BatchPlan {
    order: Vec<usize>,
    batch_size: usize,
}

impl BatchPlan {
    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn num_batches(&self) -> usize {
        self.order.len() / self.batch_size
    }

    /// Full batches in epoch order.
    pub fn batches(&self) -> impl Iterator<Item = &[usize]> {
        self.order.chunks_exact(self.batch_size)
    }

    /// The full epoch permutation, including any dropped tail.
    pub fn permutation(&self) -> &[usize] {
        &self.order
    }
}

/// Deterministic epoch plan: the permutation of `[0, n)` is derived from
/// `(seed, epoch)` alone, so reruns and different optimizers sharing a seed
/// see identical batch streams.
pub fn minibatches(n: usize, batch_size: usize, seed: u64, epoch: u64) -> Result<BatchPlan> {
    if batch_size == 0 || batch_size > n {
        return Err(Error::InvalidParameter(format!(
            "batch size {batch_size} must be in [1, {n}]"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SeededRng::new(seed).derive(epoch);
    rng.shuffle(&mut order);
    Ok(BatchPlan { order, batch_size })
}

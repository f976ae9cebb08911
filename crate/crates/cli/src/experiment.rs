//! Experiment driver: wires a task, the recurrent model, and one optimizer
//! together, trains for the configured epochs, and streams metrics rows to
//! CSV (flushed per row, so interrupted runs keep everything written so
//! far). A (config, seed) pair fully determines every column except
//! `wall_ms`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use asnaq_core::numkit::{ParamVector, SeededRng};
use asnaq_core::oracle::{GradientOracle, RnnOracle};
use asnaq_core::optim::{
    adagrad_step, adam_step, adaqn_step, asnaq_step, naq_full_batch_step, AdagradState,
    AdamState, AdaqnState, AsnaqState, Hyperparams, NaqState,
};
use asnaq_core::rnn::{self, RnnSpec, SequenceBatch};
use asnaq_core::tasks::{
    gen_counting, load_mnist_idx, minibatches, pixel_sequencer, row_sequencer, SequenceDataset,
};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, OptimizerKind, Task};

/// Environment variable giving the directory that holds the IDX files when
/// the config does not name them explicitly.
pub const DATA_DIR_ENV: &str = "NSQN_DATA_DIR";

const DEFAULT_IMAGES_FILE: &str = "train-images-idx3-ubyte";
const DEFAULT_LABELS_FILE: &str = "train-labels-idx1-ubyte";

/// Dense methods store a d x d matrix; refuse shapes where that is absurd.
const DENSE_DIM_LIMIT: usize = 2048;

/// Sub-stream tags hanging off the master seed.
const SEED_TAG_INIT: u64 = 1;
const SEED_TAG_SHUFFLE: u64 = 2;
const SEED_TAG_DATA: u64 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] asnaq_core::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Fixed CSV schema, one row per logging point.
pub const CSV_HEADER: &str = "epoch,step,loss,metric,mu,n_pairs,n_fim,resets,grad_evals,wall_ms";

#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub epoch: u64,
    pub step: u64,
    pub loss: f64,
    pub metric: f64,
    pub mu: f64,
    pub n_pairs: usize,
    pub n_fim: usize,
    pub resets: u64,
    pub grad_evals: u64,
    pub wall_ms: u128,
}

impl MetricsRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.epoch,
            self.step,
            self.loss,
            self.metric,
            self.mu,
            self.n_pairs,
            self.n_fim,
            self.resets,
            self.grad_evals,
            self.wall_ms
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    EpochsDone,
    KMaxReached,
    NumericError(String),
}

impl Termination {
    pub fn label(&self) -> &str {
        match self {
            Termination::EpochsDone => "epochs done",
            Termination::KMaxReached => "k_max reached",
            Termination::NumericError(_) => "numeric error",
        }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub final_loss: f64,
    pub final_metric: f64,
    pub wall_ms: u128,
    pub termination: Termination,
    pub rows_written: u64,
    pub steps: u64,
}

/// Per-step observation the driver hands back to the logger.
struct StepInfo {
    loss: f64,
    mu: f64,
    n_pairs: usize,
    n_fim: usize,
    resets: u64,
    grad_evals: u64,
}

enum Driver {
    Asnaq(AsnaqState),
    Adaqn(AdaqnState),
    Adam {
        w: ParamVector,
        st: AdamState,
        grad_evals: u64,
    },
    Adagrad {
        w: ParamVector,
        st: AdagradState,
        grad_evals: u64,
    },
    Dense(NaqState),
}

impl Driver {
    fn new(kind: OptimizerKind, w0: ParamVector, hp: &Hyperparams, naq_mu: f64) -> Result<Self, HarnessError> {
        let d = w0.len();
        Ok(match kind {
            OptimizerKind::Asnaq => Driver::Asnaq(AsnaqState::new(w0, hp)?),
            OptimizerKind::Adaqn => Driver::Adaqn(AdaqnState::new(w0, hp)?),
            OptimizerKind::Adam => Driver::Adam {
                w: w0,
                st: AdamState::new(d),
                grad_evals: 0,
            },
            OptimizerKind::Adagrad => Driver::Adagrad {
                w: w0,
                st: AdagradState::new(d),
                grad_evals: 0,
            },
            OptimizerKind::Naq => Driver::Dense(NaqState::new(w0, naq_mu, hp.alpha)),
            OptimizerKind::Bfgs => Driver::Dense(NaqState::new(w0, 0.0, hp.alpha)),
        })
    }

    fn params(&self) -> &ParamVector {
        match self {
            Driver::Asnaq(s) => &s.w,
            Driver::Adaqn(s) => &s.w,
            Driver::Adam { w, .. } => w,
            Driver::Adagrad { w, .. } => w,
            Driver::Dense(s) => &s.w,
        }
    }

    fn step(
        &mut self,
        hp: &Hyperparams,
        oracle: &mut dyn GradientOracle,
    ) -> Result<StepInfo, asnaq_core::Error> {
        match self {
            Driver::Asnaq(state) => {
                let report = asnaq_step(state, hp, oracle)?;
                Ok(StepInfo {
                    loss: report.loss,
                    mu: report.mu_after,
                    n_pairs: report.buffer_sizes.0,
                    n_fim: report.buffer_sizes.1,
                    resets: state.resets,
                    grad_evals: state.grad_evals,
                })
            }
            Driver::Adaqn(state) => {
                let report = adaqn_step(state, hp, oracle)?;
                Ok(StepInfo {
                    loss: report.loss,
                    mu: 0.0,
                    n_pairs: report.buffer_sizes.0,
                    n_fim: report.buffer_sizes.1,
                    resets: state.resets,
                    grad_evals: state.grad_evals,
                })
            }
            Driver::Adam { w, st, grad_evals } => {
                let (loss, grad) = oracle.loss_grad(w)?;
                *grad_evals += 1;
                adam_step(w, st, &grad)?;
                Ok(StepInfo {
                    loss,
                    mu: 0.0,
                    n_pairs: 0,
                    n_fim: 0,
                    resets: 0,
                    grad_evals: *grad_evals,
                })
            }
            Driver::Adagrad { w, st, grad_evals } => {
                let (loss, grad) = oracle.loss_grad(w)?;
                *grad_evals += 1;
                adagrad_step(w, st, &grad)?;
                Ok(StepInfo {
                    loss,
                    mu: 0.0,
                    n_pairs: 0,
                    n_fim: 0,
                    resets: 0,
                    grad_evals: *grad_evals,
                })
            }
            Driver::Dense(state) => {
                let report = naq_full_batch_step(state, oracle)?;
                Ok(StepInfo {
                    loss: report.loss,
                    mu: state.mu,
                    n_pairs: 0,
                    n_fim: 0,
                    resets: 0,
                    grad_evals: state.grad_evals,
                })
            }
        }
    }
}

/// Resolves the IDX file pair from the config or the data-directory
/// environment variable.
pub fn resolve_data_paths(config: &ExperimentConfig) -> Result<(PathBuf, PathBuf), HarnessError> {
    if let (Some(i), Some(l)) = (&config.data_images, &config.data_labels) {
        return Ok((i.clone(), l.clone()));
    }
    if let Ok(root) = std::env::var(DATA_DIR_ENV) {
        let root = PathBuf::from(root);
        return Ok((
            config
                .data_images
                .clone()
                .unwrap_or_else(|| root.join(DEFAULT_IMAGES_FILE)),
            config
                .data_labels
                .clone()
                .unwrap_or_else(|| root.join(DEFAULT_LABELS_FILE)),
        ));
    }
    Err(HarnessError::Config(ConfigError::Validation(format!(
        "image tasks need data.images and data.labels (or {DATA_DIR_ENV} pointing at the IDX files)"
    ))))
}

/// Builds the sequence dataset the configured task trains on.
pub fn build_dataset(config: &ExperimentConfig) -> Result<SequenceDataset, HarnessError> {
    match config.task {
        Task::Counting => {
            let mut rng = SeededRng::new(config.seed).derive(SEED_TAG_DATA);
            Ok(gen_counting(config.n_samples, config.seq_len, &mut rng)?)
        }
        Task::MnistRow | Task::MnistPixel => {
            let (images, labels) = resolve_data_paths(config)?;
            let full = load_mnist_idx(&images, &labels)?;
            if config.n_samples > full.len() {
                return Err(HarnessError::Config(ConfigError::Validation(format!(
                    "task.n_samples = {} exceeds the {} samples in {}",
                    config.n_samples,
                    full.len(),
                    images.display()
                ))));
            }
            let subset = full.subset(config.n_samples)?;
            Ok(match config.task {
                Task::MnistRow => row_sequencer(&subset),
                Task::MnistPixel => {
                    let side = if config.downsample == 0 {
                        None
                    } else {
                        Some(config.downsample)
                    };
                    pixel_sequencer(&subset, side)?
                }
                Task::Counting => unreachable!(),
            })
        }
    }
}

/// The task's reported metric at the current parameters on one batch:
/// probability-vector MSE for counting, accuracy for the image tasks.
fn task_metric(
    task: Task,
    spec: &RnnSpec,
    params: &ParamVector,
    batch: &SequenceBatch,
) -> Result<f64, asnaq_core::Error> {
    let cache = rnn::forward(params, spec, batch)?;
    match task {
        Task::Counting => rnn::loss_mse(&cache, batch),
        Task::MnistRow | Task::MnistPixel => Ok(rnn::accuracy(&cache, batch)),
    }
}

fn io_err(path: &std::path::Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Path of the effective-config echo written next to the metrics CSV.
pub fn config_echo_path(out: &std::path::Path) -> PathBuf {
    let mut os = out.as_os_str().to_os_string();
    os.push(".config");
    PathBuf::from(os)
}

/// Trains per the configuration, writing one CSV row per epoch (plus
/// optional per-step rows) and an effective-config echo alongside. Numeric
/// failures terminate the run but still produce a summary; the partial CSV
/// survives because every row is flushed when written.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary, HarnessError> {
    config.validate()?;
    let start = Instant::now();

    let dataset = build_dataset(config)?;
    let spec = RnnSpec::new(
        dataset.n_in(),
        config.n_hidden,
        dataset.n_out(),
        dataset.seq_len(),
    )?;
    if config.optimizer.is_dense() && spec.param_count() > DENSE_DIM_LIMIT {
        return Err(HarnessError::Config(ConfigError::Validation(format!(
            "{} stores a dense {d}x{d} matrix; d must be <= {DENSE_DIM_LIMIT} (got {d})",
            config.optimizer,
            d = spec.param_count()
        ))));
    }

    let mut init_rng = SeededRng::new(config.seed).derive(SEED_TAG_INIT);
    let w0 = rnn::init_params(&spec, &mut init_rng)?;
    let mut driver = Driver::new(config.optimizer, w0, &config.hp, config.naq_mu)?;

    let shuffle_seed = SeededRng::new(config.seed).derive(SEED_TAG_SHUFFLE).seed();

    std::fs::write(config_echo_path(&config.out), config.to_config_text())
        .map_err(|e| io_err(&config_echo_path(&config.out), e))?;
    let file = File::create(&config.out).map_err(|e| io_err(&config.out, e))?;
    let mut csv = BufWriter::new(file);
    let write_row = |csv: &mut BufWriter<File>, row: &MetricsRow| -> Result<(), HarnessError> {
        writeln!(csv, "{}", row.to_csv_line()).map_err(|e| io_err(&config.out, e))?;
        csv.flush().map_err(|e| io_err(&config.out, e))
    };
    writeln!(csv, "{CSV_HEADER}").map_err(|e| io_err(&config.out, e))?;
    csv.flush().map_err(|e| io_err(&config.out, e))?;

    let full_batch = config.optimizer.is_dense();
    let all_indices: Vec<usize> = (0..dataset.len()).collect();

    let mut k = 0u64;
    let mut rows_written = 0u64;
    let mut termination = Termination::EpochsDone;
    let mut last_loss = f64::NAN;
    let mut last_metric = f64::NAN;

    'outer: for epoch in 1..=config.epochs {
        let plan;
        let batches: Vec<&[usize]> = if full_batch {
            vec![&all_indices]
        } else {
            plan = minibatches(dataset.len(), config.batch_size, shuffle_seed, epoch - 1)?;
            plan.batches().collect()
        };
        let num_batches = batches.len();

        let mut loss_sum = 0.0;
        let mut metric_sum = 0.0;
        let mut steps_in_epoch = 0u64;
        let mut last_info: Option<StepInfo> = None;

        for indices in batches {
            if k >= config.hp.k_max {
                termination = Termination::KMaxReached;
                break;
            }
            let batch = dataset.gather(indices)?;
            let mut oracle = RnnOracle::new(&spec, &batch);
            let info = match driver.step(&config.hp, &mut oracle) {
                Ok(info) => info,
                Err(e @ asnaq_core::Error::NonFiniteAtIteration { .. })
                | Err(e @ asnaq_core::Error::NonFinite { .. }) => {
                    termination = Termination::NumericError(e.to_string());
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            k += 1;
            let metric = match task_metric(config.task, &spec, driver.params(), &batch) {
                Ok(m) => m,
                Err(e @ asnaq_core::Error::NonFiniteAtIteration { .. })
                | Err(e @ asnaq_core::Error::NonFinite { .. }) => {
                    termination = Termination::NumericError(e.to_string());
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            loss_sum += info.loss;
            metric_sum += metric;
            steps_in_epoch += 1;

            // Per-step rows skip the epoch's final step; the per-epoch row
            // owns that (epoch, step) coordinate.
            if config.log_every_steps > 0
                && k.is_multiple_of(config.log_every_steps)
                && steps_in_epoch as usize != num_batches
            {
                let row = MetricsRow {
                    epoch,
                    step: k,
                    loss: info.loss,
                    metric,
                    mu: info.mu,
                    n_pairs: info.n_pairs,
                    n_fim: info.n_fim,
                    resets: info.resets,
                    grad_evals: info.grad_evals,
                    wall_ms: start.elapsed().as_millis(),
                };
                write_row(&mut csv, &row)?;
                rows_written += 1;
            }
            last_info = Some(info);
        }

        if steps_in_epoch > 0 {
            let info = last_info.expect("at least one step ran");
            let row = MetricsRow {
                epoch,
                step: k,
                loss: loss_sum / steps_in_epoch as f64,
                metric: metric_sum / steps_in_epoch as f64,
                mu: info.mu,
                n_pairs: info.n_pairs,
                n_fim: info.n_fim,
                resets: info.resets,
                grad_evals: info.grad_evals,
                wall_ms: start.elapsed().as_millis(),
            };
            last_loss = row.loss;
            last_metric = row.metric;
            write_row(&mut csv, &row)?;
            rows_written += 1;
        }

        if termination != Termination::EpochsDone {
            break 'outer;
        }
    }

    Ok(RunSummary {
        final_loss: last_loss,
        final_metric: last_metric,
        wall_ms: start.elapsed().as_millis(),
        termination,
        rows_written,
        steps: k,
    })
}

//! Line-oriented experiment configuration: `key = value` pairs, `#`
//! comments, dotted keys for namespacing. Every omitted key falls back to a
//! documented default; the defaults for the network and batch shape depend
//! on the selected task.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use asnaq_core::optim::Hyperparams;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for '{key}': {hint}")]
    BadValue {
        key: String,
        value: String,
        hint: String,
    },
    #[error("{0}")]
    Validation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Counting,
    MnistRow,
    MnistPixel,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Counting => "counting",
            Task::MnistRow => "mnist-row",
            Task::MnistPixel => "mnist-pixel",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Asnaq,
    Adaqn,
    Adam,
    Adagrad,
    Naq,
    Bfgs,
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Asnaq => "asnaq",
            OptimizerKind::Adaqn => "adaqn",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Naq => "naq",
            OptimizerKind::Bfgs => "bfgs",
        }
    }

    /// Dense full-batch methods build a d x d inverse Hessian.
    pub fn is_dense(&self) -> bool {
        matches!(self, OptimizerKind::Naq | OptimizerKind::Bfgs)
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub epochs: u64,
    pub batch_size: usize,
    pub out: PathBuf,
    /// Extra per-step logging interval; 0 keeps per-epoch rows only.
    pub log_every_steps: u64,
    /// Counting-task sequence length.
    pub seq_len: usize,
    pub n_hidden: usize,
    pub n_samples: usize,
    /// Pixel-task downsampled side length; 0 disables downsampling.
    pub downsample: usize,
    pub data_images: Option<PathBuf>,
    pub data_labels: Option<PathBuf>,
    /// Fixed momentum for the full-batch accelerated method.
    pub naq_mu: f64,
    pub hp: Hyperparams,
}

impl ExperimentConfig {
    /// Task-dependent defaults; the benchmark settings per task.
    pub fn defaults_for(task: Task) -> Self {
        let (seq_len, n_hidden, n_samples, batch_size, epochs, downsample) = match task {
            Task::Counting => (20, 24, 10_000, 50, 75, 0),
            Task::MnistRow => (0, 100, 5_000, 128, 10, 0),
            Task::MnistPixel => (0, 100, 2_000, 128, 10, 14),
        };
        Self {
            task,
            optimizer: OptimizerKind::Asnaq,
            seed: 1,
            epochs,
            batch_size,
            out: PathBuf::from("metrics.csv"),
            log_every_steps: 0,
            seq_len,
            n_hidden,
            n_samples,
            downsample,
            data_images: None,
            data_labels: None,
            naq_mu: 0.9,
            hp: Hyperparams::default(),
        }
    }

    /// Cross-field checks after all keys are applied.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.hp
            .validate()
            .map_err(|e| ConfigError::Validation(e.to_string()))?;
        if self.epochs == 0 {
            return Err(ConfigError::Validation("epochs must be >= 1".into()));
        }
        if self.n_samples == 0 {
            return Err(ConfigError::Validation("task.n_samples must be >= 1".into()));
        }
        if self.batch_size == 0 || self.batch_size > self.n_samples {
            return Err(ConfigError::Validation(format!(
                "batch size {} must be in [1, task.n_samples = {}]",
                self.batch_size, self.n_samples
            )));
        }
        if self.n_hidden == 0 {
            return Err(ConfigError::Validation("task.n_hidden must be >= 1".into()));
        }
        if self.task == Task::Counting && self.seq_len == 0 {
            return Err(ConfigError::Validation("task.T must be >= 1".into()));
        }
        if !(self.naq_mu >= 0.0 && self.naq_mu < 1.0) {
            return Err(ConfigError::Validation(format!(
                "naq.mu must be in [0, 1), got {}",
                self.naq_mu
            )));
        }
        Ok(())
    }

    /// Serializes the effective configuration with every key explicit.
    /// Parsing the result reproduces `self` exactly.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("task", self.task.to_string());
        kv("optimizer", self.optimizer.to_string());
        kv("seed", self.seed.to_string());
        kv("epochs", self.epochs.to_string());
        kv("b", self.batch_size.to_string());
        kv("out", self.out.display().to_string());
        kv("log.every_steps", self.log_every_steps.to_string());
        kv("task.T", self.seq_len.to_string());
        kv("task.n_hidden", self.n_hidden.to_string());
        kv("task.n_samples", self.n_samples.to_string());
        kv("task.downsample", self.downsample.to_string());
        if let Some(p) = &self.data_images {
            kv("data.images", p.display().to_string());
        }
        if let Some(p) = &self.data_labels {
            kv("data.labels", p.display().to_string());
        }
        kv("naq.mu", self.naq_mu.to_string());
        kv("hp.alpha", self.hp.alpha.to_string());
        kv("hp.mu_min", self.hp.mu_min.to_string());
        kv("hp.mu_max", self.hp.mu_max.to_string());
        kv("hp.phi", self.hp.phi.to_string());
        kv("hp.gamma", self.hp.gamma.to_string());
        kv("hp.update_every", self.hp.update_every.to_string());
        kv("hp.curvature_capacity", self.hp.curvature_capacity.to_string());
        kv("hp.fim_capacity", self.hp.fim_capacity.to_string());
        kv("hp.eps_h0", self.hp.eps_h0.to_string());
        kv("hp.eps_curv", self.hp.eps_curv.to_string());
        kv("hp.k_max", self.hp.k_max.to_string());
        s
    }
}

const KNOWN_KEYS: &[&str] = &[
    "task",
    "optimizer",
    "seed",
    "epochs",
    "b",
    "out",
    "log.every_steps",
    "task.T",
    "task.n_hidden",
    "task.n_samples",
    "task.downsample",
    "data.images",
    "data.labels",
    "naq.mu",
    "hp.alpha",
    "hp.mu_min",
    "hp.mu_max",
    "hp.phi",
    "hp.gamma",
    "hp.update_every",
    "hp.curvature_capacity",
    "hp.fim_capacity",
    "hp.eps_h0",
    "hp.eps_curv",
    "hp.k_max",
];

/// Splits config text into ordered (key, value) pairs, rejecting malformed
/// lines and unknown keys. Later occurrences of a key win.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let known: BTreeSet<&str> = KNOWN_KEYS.iter().copied().collect();
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                text: raw.trim().to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                text: raw.trim().to_string(),
            });
        }
        if !known.contains(key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, hint: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        hint: hint.to_string(),
    })
}

fn apply_pair(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<(), ConfigError> {
    match key {
        "task" => {} // consumed in the pre-pass that selects defaults
        "optimizer" => {
            cfg.optimizer = match value {
                "asnaq" => OptimizerKind::Asnaq,
                "adaqn" => OptimizerKind::Adaqn,
                "adam" => OptimizerKind::Adam,
                "adagrad" => OptimizerKind::Adagrad,
                "naq" => OptimizerKind::Naq,
                "bfgs" => OptimizerKind::Bfgs,
                _ => {
                    return Err(ConfigError::BadValue {
                        key: key.into(),
                        value: value.into(),
                        hint: "one of asnaq|adaqn|adam|adagrad|naq|bfgs".into(),
                    })
                }
            };
        }
        "seed" => cfg.seed = parse_num(key, value, "unsigned 64-bit integer")?,
        "epochs" => cfg.epochs = parse_num(key, value, "positive integer")?,
        "b" => cfg.batch_size = parse_num(key, value, "positive integer")?,
        "out" => cfg.out = PathBuf::from(value),
        "log.every_steps" => cfg.log_every_steps = parse_num(key, value, "integer, 0 disables")?,
        "task.T" => cfg.seq_len = parse_num(key, value, "positive integer")?,
        "task.n_hidden" => cfg.n_hidden = parse_num(key, value, "positive integer")?,
        "task.n_samples" => cfg.n_samples = parse_num(key, value, "positive integer")?,
        "task.downsample" => cfg.downsample = parse_num(key, value, "integer, 0 disables")?,
        "data.images" => cfg.data_images = Some(PathBuf::from(value)),
        "data.labels" => cfg.data_labels = Some(PathBuf::from(value)),
        "naq.mu" => cfg.naq_mu = parse_num(key, value, "real in [0, 1)")?,
        "hp.alpha" => cfg.hp.alpha = parse_num(key, value, "positive real")?,
        "hp.mu_min" => cfg.hp.mu_min = parse_num(key, value, "real in (0, 1)")?,
        "hp.mu_max" => cfg.hp.mu_max = parse_num(key, value, "real in (0, 1)")?,
        "hp.phi" => cfg.hp.phi = parse_num(key, value, "real > 1")?,
        "hp.gamma" => cfg.hp.gamma = parse_num(key, value, "real >= 1")?,
        "hp.update_every" => cfg.hp.update_every = parse_num(key, value, "positive integer")?,
        "hp.curvature_capacity" => {
            cfg.hp.curvature_capacity = parse_num(key, value, "positive integer")?
        }
        "hp.fim_capacity" => cfg.hp.fim_capacity = parse_num(key, value, "positive integer")?,
        "hp.eps_h0" => cfg.hp.eps_h0 = parse_num(key, value, "positive real")?,
        "hp.eps_curv" => cfg.hp.eps_curv = parse_num(key, value, "positive real")?,
        "hp.k_max" => cfg.hp.k_max = parse_num(key, value, "positive integer")?,
        _ => return Err(ConfigError::UnknownKey(key.to_string())),
    }
    Ok(())
}

/// Parses config text plus override pairs (applied after the file, in
/// order) into a validated configuration.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ExperimentConfig, ConfigError> {
    let mut pairs = parse_pairs(text)?;
    for (k, v) in overrides {
        let known: BTreeSet<&str> = KNOWN_KEYS.iter().copied().collect();
        if !known.contains(k.as_str()) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        pairs.push((k.clone(), v.clone()));
    }

    // The task choice decides the defaults, so resolve it first.
    let mut task = Task::Counting;
    for (k, v) in &pairs {
        if k == "task" {
            task = match v.as_str() {
                "counting" => Task::Counting,
                "mnist-row" => Task::MnistRow,
                "mnist-pixel" => Task::MnistPixel,
                _ => {
                    return Err(ConfigError::BadValue {
                        key: "task".into(),
                        value: v.clone(),
                        hint: "one of counting|mnist-row|mnist-pixel".into(),
                    })
                }
            };
        }
    }

    let mut cfg = ExperimentConfig::defaults_for(task);
    for (k, v) in &pairs {
        apply_pair(&mut cfg, k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses config text with no overrides.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with_overrides(text, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_benchmark_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.task, Task::Counting);
        assert_eq!(cfg.optimizer, OptimizerKind::Asnaq);
        assert_eq!(cfg.hp.alpha, 0.01);
        assert_eq!(cfg.hp.gamma, 1.01);
        assert_eq!(cfg.hp.phi, 1.1);
        assert_eq!(cfg.hp.update_every, 5);
        assert_eq!(cfg.hp.curvature_capacity, 10);
        assert_eq!(cfg.hp.fim_capacity, 100);
        assert_eq!(cfg.hp.mu_min, 0.1);
        assert_eq!(cfg.hp.mu_max, 0.99);
        // Counting-task shape defaults.
        assert_eq!(cfg.n_hidden, 24);
        assert_eq!(cfg.batch_size, 50);
        assert_eq!(cfg.seq_len, 20);
        assert_eq!(cfg.epochs, 75);
        assert_eq!(cfg.n_samples, 10_000);
    }

    #[test]
    fn task_selection_switches_defaults() {
        let cfg = parse_config("optimizer = asnaq\ntask = counting").unwrap();
        assert_eq!((cfg.n_hidden, cfg.batch_size, cfg.seq_len), (24, 50, 20));
        let cfg = parse_config("task = mnist-row").unwrap();
        assert_eq!((cfg.n_hidden, cfg.batch_size), (100, 128));
        assert_eq!(cfg.n_samples, 5_000);
        let cfg = parse_config("task = mnist-pixel").unwrap();
        assert_eq!(cfg.downsample, 14);
        assert_eq!(cfg.n_samples, 2_000);
    }

    #[test]
    fn out_of_range_value_is_a_validation_error_with_bound() {
        let err = parse_config("hp.gamma = 0.5").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(">= 1"), "message should state the bound: {msg}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("hp.turbo = 9").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey(ref k) if k == "hp.turbo"));
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_config("task = counting\nnot a pair\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let cfg = parse_config("# full line\n\n  b = 25 # trailing\n").unwrap();
        assert_eq!(cfg.batch_size, 25);
    }

    #[test]
    fn later_keys_and_overrides_win() {
        let cfg = parse_config_with_overrides(
            "seed = 1\nseed = 2\n",
            &[("seed".into(), "3".into())],
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
    }

    #[test]
    fn effective_config_round_trips() {
        let cfg = parse_config(
            "task = mnist-pixel\noptimizer = adaqn\nseed = 9\nhp.alpha = 0.02\ndata.images = /tmp/i\ndata.labels = /tmp/l\n",
        )
        .unwrap();
        let text = cfg.to_config_text();
        let back = parse_config(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn batch_larger_than_samples_rejected() {
        let err = parse_config("task = counting\ntask.n_samples = 10\nb = 11\n").unwrap_err();
        assert!(err.to_string().contains("[1, task.n_samples = 10]"));
    }
}

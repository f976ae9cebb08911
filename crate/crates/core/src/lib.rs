//! Adaptive stochastic Nesterov-accelerated quasi-Newton training of
//! recurrent networks, from the flat-vector substrate up: a seeded numeric
//! kernel, a single-layer tanh RNN with exact backpropagation through time,
//! the accelerated limited-memory optimizer with its adaQN / dense BFGS /
//! NAQ / Adam / Adagrad baselines, a symbolic cost model, and the benchmark
//! task generators (binary-string counting, row-wise and pixel-wise image
//! sequences over IDX data).

pub mod error;
pub mod numkit;
pub mod oracle;
pub mod optim;
pub mod rnn;
pub mod tasks;

pub use error::{Error, Result};

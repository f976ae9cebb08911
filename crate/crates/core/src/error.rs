//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Two vectors that must share a length do not.
    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A caller-supplied value is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A NaN or infinity showed up where only finite values are allowed.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// Loss or gradient went non-finite during optimization.
    #[error("non-finite {what} at iteration {iteration}")]
    NonFiniteAtIteration { what: &'static str, iteration: u64 },

    /// A curvature pair with s'y <= 0 reached a dense BFGS update.
    #[error("curvature condition violated: s'y = {sty} is not positive")]
    Curvature { sty: f64 },

    /// fim_y was asked to act on an empty gradient buffer.
    #[error("accumulated-gradient buffer is empty")]
    EmptyFimBuffer,

    /// An internal invariant that admission checks should guarantee failed.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    /// An IDX file had the wrong magic number.
    #[error("{path}: bad IDX magic 0x{found:08x}, expected 0x{expected:08x}")]
    IdxMagic {
        path: String,
        found: u32,
        expected: u32,
    },

    /// An IDX file was structurally malformed (truncated, bad dims).
    #[error("malformed IDX data: {0}")]
    Format(String),

    /// Image and label files disagree on the sample count.
    #[error("image/label count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

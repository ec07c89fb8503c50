use thiserror::Error;

/// Errors raised by the diagnostic library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: wrong lengths, non-finite values, out-of-domain parameters.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Input is well-formed but carries no usable variation (constant variable, rank deficiency).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// A run configuration that violates its own constraints.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    /// A subsample kept coming up degenerate after every allowed redraw.
    #[error("subsample size {subsample_size}, draw {draw}: {redraws} redraws exhausted ({reason})")]
    RedrawsExhausted {
        subsample_size: usize,
        draw: usize,
        redraws: usize,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn degenerate<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::DegenerateInput(msg.into()))
}

pub(crate) fn invalid_config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidConfig(msg.into()))
}

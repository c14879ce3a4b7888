use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    /// The frame does not span the target matrix space.
    #[error("frame is not informationally complete: rank {rank} of {required} (deficit {deficit})")]
    IncompleteFrame {
        rank: usize,
        required: usize,
        deficit: usize,
    },

    /// The data lies outside the range of the frame map.
    #[error("measurement data is inconsistent with the frame (residual {residual:e})")]
    Inconsistent { residual: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("locality level {0} is not supported")]
    UnsupportedLevel(usize),

    #[error("derivation failed: {0}")]
    Derivation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions {height}x{width}: {reason}")]
    Dimension {
        height: usize,
        width: usize,
        reason: &'static str,
    },
    #[error("size mismatch: expected {expected:?}, got {actual:?}")]
    SizeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("image {height}x{width} too small for {levels} levels (needs at least {required} per side)")]
    TooSmall {
        height: usize,
        width: usize,
        levels: usize,
        required: usize,
    },
    #[error("wavelet pair does not reconstruct: worst deviation {deviation:e}")]
    NotPerfectReconstruction { deviation: f64 },
    #[error("filter bank not admissible: frame response {value:e} at bin ({row}, {col})")]
    Admissibility { row: usize, col: usize, value: f64 },
    #[error("shear {k}/2^{refinement} is not representable")]
    Shear { k: i64, refinement: u32 },
    #[error("expected {expected} coefficient planes, got {actual}")]
    PlaneCount { expected: usize, actual: usize },
    #[error("non-finite value in {stage} at iteration {iteration}")]
    NonFinite { stage: &'static str, iteration: usize },
    #[error("measure undefined: {0}")]
    UndefinedMeasure(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

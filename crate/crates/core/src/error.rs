use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("thresholds must be non-decreasing")]
    NonMonotoneThresholds,

    #[error("threshold {k} exceeds the number of applicants {n}")]
    ThresholdExceedsN { k: usize, n: usize },

    #[error("closed form undefined: every threshold must be >= 1 and m must exceed the last threshold")]
    ClosedFormDomain,

    #[error("internal disagreement: closed form gives {closed}, recurrence gives {recurrence}")]
    InternalDisagreement { closed: String, recurrence: String },

    #[error("prefix tree for n = {n} exceeds the cap of {cap}")]
    TreeTooLarge { n: usize, cap: usize },

    #[error("child index {j} out of range for a prefix of length {len}")]
    ChildOutOfRange { j: usize, len: usize },

    #[error("unknown format `{0}`")]
    UnknownFormat(String),

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tol:e}")]
    QuadratureNonconvergent { estimate: f64, tol: f64 },

    #[error("exhaustive enumeration for n = {n} exceeds the cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("malformed permutation: {0}")]
    MalformedPermutation(String),

    #[error("right-hand thresholds disagree between s = {s_small} and s = {s_large}")]
    RightHandMismatch { s_small: usize, s_large: usize },
}

impl Error {
    /// True for errors caused by bad input rather than by a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::NonMonotoneThresholds
                | Error::ThresholdExceedsN { .. }
                | Error::TreeTooLarge { .. }
                | Error::ChildOutOfRange { .. }
                | Error::UnknownFormat(_)
                | Error::TooLarge { .. }
                | Error::MalformedPermutation(_)
        )
    }
}

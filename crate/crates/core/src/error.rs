use thiserror::Error;

use crate::exprfield::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expression parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("expression evaluation error at t = {t}: {source}")]
    Eval { t: f64, source: EvalError },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("empty point set")]
    EmptySet,

    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("trajectories span different intervals: [{a0}, {a1}] vs [{b0}, {b1}]")]
    SpanMismatch { a0: f64, a1: f64, b0: f64, b1: f64 },

    #[error("state left the bounds ball of radius {radius} (|x| = {norm} at t = {t})")]
    BallExit { radius: f64, norm: f64, t: f64 },

    #[error("chattering did not reach gap {target} within {max_slices} slices (best {best_gap})")]
    ChatterNotConverged {
        target: f64,
        max_slices: usize,
        best_gap: f64,
    },

    #[error("tube exit at t = {t}: gap {gap} exceeds radius {radius}")]
    TubeExit { t: f64, gap: f64, radius: f64 },

    #[error("radius function is not positive at t = {t} (r = {value})")]
    NonPositiveRadius { t: f64, value: f64 },

    #[error("segment {k} failed: {source}")]
    Segment {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Eval { .. } => "eval",
            Error::Invalid(_) => "invalid_input",
            Error::EmptySet => "empty_set",
            Error::NonFinite { .. } => "non_finite",
            Error::SpanMismatch { .. } => "span_mismatch",
            Error::BallExit { .. } => "ball_exit",
            Error::ChatterNotConverged { .. } => "chatter_not_converged",
            Error::TubeExit { .. } => "tube_exit",
            Error::NonPositiveRadius { .. } => "non_positive_radius",
            Error::Segment { .. } => "segment_failed",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

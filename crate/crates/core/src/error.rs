use thiserror::Error;

/// Errors raised by the estimation toolkit.
///
/// Validation errors describe bad inputs; numerical errors describe a run
/// that was well-posed but broke down. The CLI maps the two groups to
/// different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },

    #[error("degenerate spectrum: leading eigenvalue {lambda1} does not dominate |lambda2| = {lambda2_abs}")]
    DegenerateSpectrum { lambda1: f64, lambda2_abs: f64 },

    #[error("invalid gap: theta = {theta} must be below 1 - l2 = {limit}")]
    InvalidGap { theta: f64, limit: f64 },

    #[error("non-finite value at node {node} in round {round}")]
    NonFiniteValue { node: usize, round: usize },

    #[error("gossip averaging did not reach the target precision within {rounds} rounds")]
    MaxRoundsExceeded { rounds: usize },

    #[error("Gram matrix is rank deficient (normalized determinant {det:e})")]
    RankDeficientGram { det: f64 },

    #[error("inner product with the initial vector vanished")]
    ZeroInnerProduct,

    #[error("could not reach l2 = {target} within tolerance (last measured {measured})")]
    TargetGapUnreachable { target: f64, measured: f64 },

    #[error("trajectories never met within {t_cap} rounds")]
    NoMeetingPoint { t_cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a well-posed computation (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateSpectrum { .. }
                | Error::NonFiniteValue { .. }
                | Error::MaxRoundsExceeded { .. }
                | Error::RankDeficientGram { .. }
                | Error::ZeroInnerProduct
                | Error::TargetGapUnreachable { .. }
                | Error::NoMeetingPoint { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

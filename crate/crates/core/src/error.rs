use thiserror::Error;

/// Errors produced by the chain, spectral and truncation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),
    #[error("state {state} is outside the window of size {window}")]
    OutOfWindow { state: usize, window: usize },
    #[error("fixed-point system is singular: {0}")]
    SingularSystem(String),
    #[error("chain is not positive recurrent: limsup of q_(j-1)/p_j is {ratio}")]
    NotPositiveRecurrent { ratio: f64 },
    #[error("negative diagonal {value} at state {state}")]
    NegativeDiagonal { state: usize, value: f64 },
    #[error("psi argument must be positive, got {0}")]
    NonpositiveArgument(f64),
    #[error("psi(t) = 1 has no root in (0, 1)")]
    NoRootInUnitInterval,
    #[error("all forward coefficients vanish; use the tau = 0 branch")]
    DegenerateTailZero,
    #[error("tau = 0 requires a_m = 0 for m >= 1, but a_{m} = {value}")]
    InconsistentTauZero { m: usize, value: f64 },
    #[error("drift ratio {ratio} exceeds alpha = {alpha} at state {state}")]
    DriftViolatedAtTail { state: usize, ratio: f64, alpha: f64 },
    #[error("QR iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
    #[error("matrix of order {order} exceeds the cap {cap}")]
    MatrixTooLarge { order: usize, cap: usize },
    #[error("Perron root is not isolated: {0}")]
    PerronNotIsolated(String),
    #[error("a 1x1 matrix has no subdominant eigenvalue")]
    NoSubdominant,
    #[error("at truncation order k = {k}: {source}")]
    AtTruncation {
        k: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SingularSystem(_)
            | Error::NotPositiveRecurrent { .. }
            | Error::NegativeDiagonal { .. }
            | Error::NoRootInUnitInterval
            | Error::DriftViolatedAtTail { .. }
            | Error::NoConvergence { .. }
            | Error::PerronNotIsolated(_)
            | Error::NoSubdominant => true,
            Error::AtTruncation { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by the RIS core library.
#[derive(Debug, Error)]
pub enum RisError {
    /// A pattern or trace contains no energy at all.
    #[error("empty pattern")]
    EmptyPattern,

    /// An angle grid violates its construction rules.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// The synthesized impedance matrix has a negative-definite real part.
    #[error("non-passive network: smallest eigenvalue of Re(Z) is {eigenvalue:.6e} ohm")]
    NonPassiveNetwork { eigenvalue: f64 },

    /// The loaded system Z + Z_L cannot be solved reliably.
    #[error("singular network: condition estimate {condition:.3e}")]
    SingularNetwork { condition: f64 },

    /// The scattered field vanishes at the requested observation angle.
    #[error("null field, phase undefined for state {state}")]
    NullField { state: usize },

    /// The port incidence matrix is malformed.
    #[error("incidence matrix invalid: {0}")]
    IncidenceMatrixInvalid(String),

    /// The genetic algorithm never saw a feasible individual.
    #[error("infeasible population after {evaluations} evaluations")]
    InfeasiblePopulation { evaluations: usize },

    /// Two traces cannot be combined point by point.
    #[error("incompatible traces: {0}")]
    IncompatibleTraces(String),

    /// A codebook search was given no states to choose from.
    #[error("empty phase table")]
    EmptyPhaseTable,

    /// Vector or matrix sizes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A value fails a precondition that is not covered by a specific variant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A file could not be parsed; the message carries location information.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, RisError>;

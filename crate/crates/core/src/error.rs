use thiserror::Error;

use crate::sdp::SolverReport;

/// Errors raised by the transport library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid phase-space context: {0}")]
    InvalidContext(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// The coherent states are too close to linearly dependent to
    /// orthonormalize reliably.
    #[error(
        "near-dependent coherent states: Gram eigenvalue {eigenvalue:e} below cutoff {cutoff:e}"
    )]
    NearDependentStates { eigenvalue: f64, cutoff: f64 },

    #[error("basis does not match configuration: {0}")]
    BasisMismatch(String),

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("marginal masses are infeasible: totals {0} and {1}")]
    InfeasibleMasses(f64, f64),

    #[error("one-dimensional transport requires zero momenta")]
    NonzeroMomentum,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too coarse: coarse {coarse}, refined {fine}, claimed tolerance {tolerance}")]
    GridTooCoarse {
        coarse: f64,
        fine: f64,
        tolerance: f64,
    },

    #[error("inconsistent constraints: {0}")]
    InconsistentConstraints(String),

    /// The solver hit its iteration limit; the last report is attached.
    #[error("solver stopped after {} iterations without converging", .report.iterations)]
    MaxIterations { report: Box<SolverReport> },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("infeasible ansatz: {0}")]
    InfeasibleAnsatz(String),

    #[error("matrix violates the checkerboard pattern (entry of size {0:e})")]
    PatternViolation(f64),

    #[error("coherent frame is singular")]
    SingularFrame,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

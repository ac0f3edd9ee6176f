use thiserror::Error;

/// Errors surfaced by state construction, linear algebra and estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |H - H^dag| entry {deviation:.3e} > {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not unitary (max |U U^dag - I| entry {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPositive { eigenvalue: f64 },

    #[error("trace violation: trace is {trace:.6} (expected 1 within {tolerance:.1e})")]
    TraceViolation { trace: f64, tolerance: f64 },

    #[error("state vector norm is {norm:.6} (expected 1 within {tolerance:.1e})")]
    NormViolation { norm: f64, tolerance: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ancilla register too small: rank {rank} needs at least {rank} levels, got {levels}")]
    AncillaTooSmall { rank: usize, levels: usize },

    #[error("loss or gradient returned a non-finite value")]
    NonFiniteLoss,

    #[error("internal numerical check failed: {0}")]
    NumericalCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;

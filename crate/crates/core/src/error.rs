use thiserror::Error;

/// Everything that can go wrong inside the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("site {site} out of range for {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("no singular value below the null-space tolerance")]
    NoNullSpace,

    #[error("null space has dimension {dimension}, expected exactly one")]
    DegenerateNullSpace { dimension: usize },

    #[error("steady state is not unique (null-space dimension {dimension}); is gamma zero?")]
    DegenerateSteadyState { dimension: usize },

    #[error("shifted linear system is singular to working precision")]
    SingularSystem,

    #[error("observable is not Hermitian")]
    NonHermitianObservable,

    #[error("expectation value has imaginary part {imaginary:e}")]
    ComplexExpectation { imaginary: f64 },

    #[error("expectation value {value} outside [-1, 1]")]
    ExpectationOutOfRange { value: f64 },

    #[error("coupling strength must be positive, got {0}")]
    InvalidCouplingStrength(f64),

    #[error("unsupported qubit count {0} (supported: 1..=4)")]
    UnsupportedQubitCount(usize),

    #[error("Legendre degree {0} not supported (1..=3)")]
    DegreeOutOfRange(usize),

    #[error("vector has zero variance")]
    ZeroVariance,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("analytic tail {analytic:e} and late-time value {numerical:e} disagree")]
    TailMismatch { analytic: f64, numerical: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

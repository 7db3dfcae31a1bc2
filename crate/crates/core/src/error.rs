use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} is not normalized: |x|^2 + |y|^2 = {norm}")]
    NotNormalized { what: &'static str, norm: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("environment must contain at least one particle")]
    EmptyEnvironment,
    #[error("particle index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("subsystem size p = {p} must satisfy 1 <= p <= N = {n}")]
    SubsystemSize { p: usize, n: usize },
    #[error("observable has {found} particle blocks but the model has {expected} particles")]
    SpecMismatch { expected: usize, found: usize },
    #[error("invalid time grid: {0}")]
    InvalidGrid(&'static str),
    #[error("expectation value has imaginary residue {residue:e}")]
    ImaginaryResidue { residue: f64 },
    #[error("oracle supports at most {max} environment particles, got {n}")]
    OracleCapacity { n: usize, max: usize },
    #[error("state vector has {found} qubits, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid sampling policy: {0}")]
    InvalidPolicy(&'static str),
    #[error("ensemble needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("threshold {threshold} out of range (must lie in (0, {upper}))")]
    ThresholdOutOfRange { threshold: f64, upper: f64 },
    #[error("no grid points at or after t = {0}")]
    EmptyWindow(f64),
}

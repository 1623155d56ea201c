use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |A - A^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max |U^dagger U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("unsupported spin quantum number {0}")]
    UnsupportedSpin(f64),

    #[error("probability {name} = {value} outside [{lo}, {hi}]")]
    ProbabilityOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unphysical relaxation times: T2 = {t2} ns exceeds 2*T1 = {} ns", 2.0 * .t1)]
    Unphysical { t1: f64, t2: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed gate: {0}")]
    MalformedGate(String),

    #[error("singular correction system: {0}")]
    SingularCorrection(String),
}

pub type Result<T> = std::result::Result<T, Error>;

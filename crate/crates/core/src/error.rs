use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("direction is not a unit vector (norm = {norm})")]
    NonUnitDirection { norm: f64 },

    /// The effective field of one angular-momentum species vanishes, so its tilt is undefined.
    #[error("degenerate rotating frame: {species} frequency vanishes, tilt angle undefined")]
    DegenerateFrame { species: &'static str },

    #[error("matrix is not Hermitian (max |M - M^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not an eigenstate of the effective Hamiltonian (residual = {residual:e})")]
    NotEigenstate { residual: f64 },

    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("step too large for the integrator: |H| h = {norm_h:.4} exceeds 0.1, increase steps")]
    StepTooLarge { norm_h: f64 },

    #[error("too few steps: {steps} (minimum {min})")]
    TooFewSteps { steps: usize, min: usize },

    #[error("trajectory unusable for quadrature: {0}")]
    Quadrature(String),

    #[error("operation not available for this scenario: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

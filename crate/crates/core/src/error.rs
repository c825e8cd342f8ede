use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed config document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("mode index {index} out of range for {modes} mode(s)")]
    ModeIndex { index: usize, modes: usize },

    #[error("operation needs a pair of distinct modes, got ({0}, {0})")]
    SamePair(usize),

    #[error("operation needs at least {needed} modes, config has {actual}")]
    TooFewModes { needed: usize, actual: usize },

    #[error("simplified closed forms need identical modes: {0}")]
    NotIdentical(String),

    #[error("quadrature angle has sin(theta) = 0, optimum and threshold are undefined")]
    DegenerateAngle,

    #[error("steady state did not converge after {iterations} iterations (last residual {residual:e})")]
    SteadyStateDiverged { iterations: usize, residual: f64 },

    #[error("linearized system is singular at omega = {omega}")]
    Singular { omega: f64 },

    #[error("variance has imaginary residue {imag:e} (real part {real:e}) at omega = {omega}")]
    ImaginaryResidue { real: f64, imag: f64, omega: f64 },

    #[error("empty {0} grid")]
    EmptyGrid(&'static str),

    #[error("disorder spec: {0}")]
    Disorder(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

use thiserror::Error;

/// Failure modes shared by every layer of the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("aliasing: {samples} samples per circle cannot resolve truncation {truncation} (need at least {needed})")]
    Aliasing {
        samples: usize,
        truncation: usize,
        needed: usize,
    },
    #[error("wrong model: {0}")]
    WrongModel(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("model construction failed: {0}")]
    Model(String),
    #[error("unsupported spin structure: {0}")]
    UnsupportedSpin(String),
    #[error("not factorable in this class: {0}")]
    NotFactorable(String),
    #[error("no convergence: {what} (residual {residual:.3e}, trace {trace:?})")]
    NonConvergence {
        what: String,
        residual: f64,
        trace: Vec<(usize, f64)>,
    },
    #[error("singular section: {what} (smallest singular value {sigma_min:.3e})")]
    Singular { what: String, sigma_min: f64 },
    #[error("ill-conditioned: {0}")]
    Conditioning(String),
    #[error("truncation overflow: {0}")]
    Resize(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Aliasing { .. }
            | Error::WrongModel(_)
            | Error::Domain(_)
            | Error::BadInput(_)
            | Error::UnsupportedSpin(_)
            | Error::Resize(_)
            | Error::Json(_) => 2,
            Error::NotFactorable(_) => 3,
            Error::Verification(_) => 4,
            Error::Model(_)
            | Error::NonConvergence { .. }
            | Error::Singular { .. }
            | Error::Conditioning(_)
            | Error::Inconclusive(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

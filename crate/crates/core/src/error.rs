use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every invariant module.
///
/// Variants fall into two families: validation failures (the input does not
/// satisfy a documented precondition) and numerical failures (the input is
/// fine but an algorithm could not reach its accuracy target).
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("phase step at sample {index} is {step:.3} turns; refine the path")]
    RefinePath { index: usize, step: f64 },

    #[error("path refinement exceeded depth {depth} between samples {index} and {next}", next = .index + 1)]
    RefinementDepth { index: usize, depth: usize },

    #[error("implicit midpoint Newton iteration failed to converge at step {step}")]
    Newton { step: usize },

    #[error("symplecticity drift {drift:.3e} exceeds {tol:.1e} at step {step}; use a smaller dt")]
    SymplecticDrift { drift: f64, tol: f64, step: usize },

    #[error("trajectory left the disk U at step {step}")]
    SupportViolation { step: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("evaluation failed at power p = {p}: {source}")]
    AtPower {
        p: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("sample {index}: {source}")]
    AtSample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Validation(_) | Error::Parse { .. } | Error::Io(_) => true,
            Error::AtPower { source, .. } | Error::AtSample { source, .. } => {
                source.is_validation()
            }
            _ => false,
        }
    }
}

use thiserror::Error;

/// Errors raised by the curve, crack, solver and evolution layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructed object violates one of its invariants.
    #[error("validation error: {0}")]
    Validation(String),

    /// Inputs do not satisfy the documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The extension construction produced an inadmissible perturbation.
    #[error("construction error: {0}")]
    Construction(String),

    /// A point list is not a prefix sample of the given crack.
    #[error("recognition error: {0}")]
    Recognition(String),

    /// The crack leaves the closed domain.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Rasterization depth too coarse for the grid step.
    #[error("coupling error: {0}")]
    Coupling(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e}): {message}")]
    Solver {
        message: String,
        iterations: usize,
        residual: f64,
    },

    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for numerical failures (directly or wrapped in a step error).
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::Solver { .. } => true,
            Error::Step { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

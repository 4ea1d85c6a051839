use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("potential is not finite ({value}) at quadrature point t = {point}")]
    Assembly { point: f64, value: f64 },

    #[error("mass not SPD: {0}")]
    MassNotSpd(String),

    #[error("shifted operator could not be factorized at pivot {pivot}; try a smaller shift than {shift}")]
    Factorization { pivot: usize, shift: f64 },

    #[error("numeric failure in {what} after {iterations} iterations: {detail}")]
    Convergence { what: &'static str, iterations: usize, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("at {context}: {source}")]
    Context {
        context: String,
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
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }
}

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical corruption: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("infeasible jump at site {site}: C_jj = {weight:e}")]
    InfeasibleJump { site: usize, weight: f64 },

    #[error("trajectory failed at t = {time} (step {step}): {source}")]
    Trajectory {
        time: f64,
        step: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps `self` with a human-readable context string.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Domain(_) => "domain",
            Error::Contract(_) => "contract",
            Error::Numerical(_) => "numerical",
            Error::Config(_) => "config",
            Error::InfeasibleJump { .. } => "infeasible_jump",
            Error::Trajectory { source, .. } | Error::Context { source, .. } => source.kind(),
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

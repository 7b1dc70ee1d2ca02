use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid norm, domain, cone, profile or solver configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the domain of an operation (e.g. gradient at the origin).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested operation is not supported by this norm family.
    #[error("capability error: {0}")]
    Capability(String),

    /// A norm is not differentiable at the given point. In two dimensions the
    /// one-sided gradient limits are reported.
    #[error("norm is not differentiable at {point:?}")]
    NonDifferentiable {
        point: Vec<f64>,
        one_sided: Option<(Vec<f64>, Vec<f64>)>,
    },

    #[error("meshing error: {0}")]
    Meshing(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    Solver {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    /// Field and mesh (or other paired inputs) do not match.
    #[error("consistency error: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

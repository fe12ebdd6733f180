use thiserror::Error;

/// Errors raised by model construction and field evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Constructor arguments outside the model's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Configuration sits on an enumerated singular point of the model.
    #[error("singular configuration: {0}")]
    Singularity(String),
    /// Density fell below the node threshold where an inverse density is needed.
    #[error("node: density {density:e} below node_epsilon {epsilon:e}")]
    Node { density: f64, epsilon: f64 },
    /// Operation invoked on an unsuitable model or with invalid settings.
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared by all core modules.

/// Errors produced by the model, solver, and reproduction-number machinery.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An input lies outside the operation's domain (negative state,
    /// population bound exceeded, non-positive forcing, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed: step-count exhaustion, step underflow,
    /// non-finite state, or a root bracket that could not be established.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An incidence function violates one of the structural assumptions
    /// required by the linearization (for example f'(0) <= 0).
    #[error("assumption violation: {0}")]
    Assumption(String),
}

pub type Result<T> = std::result::Result<T, Error>;

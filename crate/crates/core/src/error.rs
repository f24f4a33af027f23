use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The queried point lies on the nonsmooth locus; the Clarke
    /// subdifferential must be used instead of the gradient.
    #[error("nondifferentiable at ({x}, {y}): {hint}")]
    Nondifferentiable { x: f64, y: f64, hint: String },

    /// The queried point is outside the region where the function is defined.
    #[error("point ({x}, {y}) is outside the tube union")]
    OutOfDomain { x: f64, y: f64 },

    /// A geometric construction violated one of its invariants.
    #[error("construction error: {0}")]
    Construction(String),

    /// The step generator could not satisfy one of its constraints.
    #[error("infeasible step at i = {index}: {condition} violated")]
    Infeasible { condition: &'static str, index: u64 },

    /// A verification was requested on a run that does not contain the
    /// required events.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
}

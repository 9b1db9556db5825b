//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, ArbError>;

/// Errors raised by simulation, pricing, hedging, funding, and
/// classification routines.
#[derive(Debug, Error)]
pub enum ArbError {
    /// A model or payoff parameter violates its domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An input lies outside the domain of a pricing formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// The time step is too coarse for the chosen scheme.
    #[error("discretization error: {0}")]
    Discretization(String),

    /// A path left the regime a pricing formula assumes.
    #[error("regime violation: {0}")]
    RegimeViolation(String),

    /// The requested operation is not defined for this model.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// Mismatched grids, lengths, or missing path components.
    #[error("structural error: {0}")]
    Structural(String),

    /// Numerical quadrature failed to converge.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// A linear or PDE solver failed.
    #[error("solver error: {0}")]
    Solver(String),

    /// A convergence decision could not be made reliably.
    #[error("indeterminate: {0}")]
    Indeterminate(String),
}

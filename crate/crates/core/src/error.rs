use thiserror::Error;

/// Errors produced by the model, integration and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A state contained a non-finite component.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A finite state outside the simplex / triangle, or an argument outside its range.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid simulation options: {0}")]
    InvalidOptions(String),

    /// A logarithmic first integral was evaluated at I <= 0.
    #[error("first integral is singular at I = {i}")]
    Singular { i: f64 },

    #[error("integration blew up at t = {t}")]
    IntegrationBlowup { t: f64 },

    /// The candidate of a conservation check was not finite at a sample point.
    #[error("candidate is not finite at ({}, {})", point[0], point[1])]
    Evaluation { point: [f64; 2] },

    /// Final-size query started on the repelling part of the equilibrium segment.
    #[error("unstable start: I0 = {i0} lies on the equilibrium segment above sigma = {sigma}")]
    UnstableStart { i0: f64, sigma: f64 },

    #[error("no root: {0}")]
    NoRoot(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

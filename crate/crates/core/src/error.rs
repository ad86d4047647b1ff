use thiserror::Error;

/// Errors raised by the physics pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {what}{}", velocity_suffix(*.velocity))]
    Singularity { what: String, velocity: Option<f64> },

    #[error("degenerate steady state (reciprocal condition estimate {rcond:.3e})")]
    DegenerateSteadyState { rcond: f64 },

    #[error("linear solve failed (reciprocal condition estimate {rcond:.3e})")]
    Numerical { rcond: f64 },

    #[error("quadrature did not converge: relative error estimate {achieved:.3e} > {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

fn velocity_suffix(v: Option<f64>) -> String {
    match v {
        Some(v) => format!(" (velocity class v = {v:.6} m/s)"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

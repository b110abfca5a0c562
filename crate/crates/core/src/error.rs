use thiserror::Error;

/// Errors raised by the model, functional and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("argument t = {0} outside the model domain [0, 1 + eps]")]
    Domain(f64),
    #[error("derivative order {0} not in 0..=4")]
    Order(u32),
    #[error("xi''({0}) = 0: the structure function is singular here")]
    Singularity(f64),
    #[error("invalid order parameter: {0}")]
    InvalidOrderParam(String),
    #[error("order parameter drops below the positivity floor (min {min:e} at t = {at})")]
    Positivity { min: f64, at: f64 },
    #[error("invalid finite-temperature measure: {0}")]
    Support(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("model is not of the 2+p form: {0}")]
    Shape(String),
    #[error("no convergence after {iterations} iterations: {what}")]
    NonConvergence { what: String, iterations: usize },
    #[error("reduction inconclusive: best obstacle margin {best_margin:e}, best gap {best_gap:e}")]
    Inconclusive { best_margin: f64, best_gap: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

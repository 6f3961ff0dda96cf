use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of an operation (negative time, bad shape, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid or inconsistent configuration, including violated hypothesis gates.
    #[error("configuration error: {0}")]
    Config(String),

    /// The fixed-point corrector did not reach its tolerance.
    #[error("corrector did not converge after {iterations} iterations (residual {residual:e})")]
    Corrector { iterations: usize, residual: f64 },

    /// Iterative maximization of the Sobolev quotient did not settle.
    #[error("Sobolev quotient iteration did not converge after {iterations} iterations (best {best})")]
    SobolevNotConverged { iterations: usize, best: f64 },

    /// Blow-up time requested from a trajectory that never left the growth window.
    #[error("blow-up detection: {0}")]
    NoBlowup(String),

    /// Growth-rate fit refused (nonpositive or too few values).
    #[error("fit refused: {0}")]
    Fit(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

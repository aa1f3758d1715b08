use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {estimate:e} > tolerance {tol:e}")]
    Quadrature { estimate: f64, tol: f64 },

    /// Newton inversion of the volume map stalled or ran out of iterations.
    #[error("volume-map inversion failed after {iterations} iterations (residual {residual:e}, last iterate {last:?})")]
    Solver {
        iterations: usize,
        residual: f64,
        last: [f64; 3],
    },

    /// A linear operator on `E` is singular or too ill-conditioned to invert.
    #[error("ill-conditioned operator: {0}")]
    Conditioning(String),

    /// A cluster lacks the interfaces an operation needs.
    #[error("degenerate topology: {0}")]
    Topology(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input fell outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The channel carries no information about its input (e.g. identical
    /// ligand unbinding rates), so the requested quantity is undefined.
    #[error("degenerate channel: {0}")]
    Degenerate(String),

    /// Adaptive quadrature ran out of panels before meeting its tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, residual {residual:e}")]
    Quadrature { estimate: f64, residual: f64 },

    #[error("non-finite integrand value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `2B/h` is not a positive integer.
    #[error("spacing {spacing} does not divide the band [-{bandwidth}, {bandwidth}) (2B/h = {ratio}); nearest valid spacing is {nearest}")]
    NonIntegralSampleCount {
        bandwidth: f64,
        spacing: f64,
        ratio: f64,
        nearest: f64,
    },

    /// A signal that must vanish at both endpoints does not.
    #[error("signal does not vanish at the endpoints (|f(-1)| = {left:e}, |f(1)| = {right:e}, tolerance {tolerance:e})")]
    EndpointNotZero {
        left: f64,
        right: f64,
        tolerance: f64,
    },

    /// Harmonic-measure mesh does not align with the domain.
    #[error("mesh {mesh} does not divide {what} = {value}")]
    NonConformingMesh {
        mesh: f64,
        what: &'static str,
        value: f64,
    },

    /// An iterative method hit its iteration cap.
    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Two inputs are defined on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A point lies outside the region a field was solved on.
    #[error("point ({x}, {y}) lies outside the solved domain")]
    OutsideDomain { x: f64, y: f64 },

    /// Not enough usable data to perform a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

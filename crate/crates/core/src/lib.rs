//! Numerical tools for the Fourier transform of signals supported in
//! `[-1, 1]` and observed only on a band `[-B, B]`.
//!
//! * [`signals`]: sampled signals, the sine eigenfunctions `f_k` and the
//!   frequency number `ω = ‖f'‖/‖f‖`.
//! * [`transform`]: the truncated transform, closed forms and fast inversion.
//! * [`stability`]: explicit stability constants and the harmonic-measure
//!   solver they need.
//! * [`spectrum`]: singular values of the discretized operator.
//! * [`experiments`]: noisy reconstruction sweeps and error budgets.

pub mod error;
pub mod experiments;
pub mod plot;
pub mod quadrature;
pub mod signals;
pub mod spectrum;
pub mod stability;
pub mod transform;

pub use error::{Error, Result};

//! Covariance kernels, their Taylor data at the origin, and admissibility checks.

mod coeffs;
pub mod finite_diff;
mod kernels;

pub use coeffs::{check_admissibility, normalize, taylor_coeffs, AdmissibilityReport, TaylorCoeffs};
pub use kernels::{FnKernel, Model, RadialKernel, Scaled, MAX_TAYLOR_INDEX};

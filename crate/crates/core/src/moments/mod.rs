//! Joint Gaussian moments of gradients and Hessians at two points, and the
//! conditional Hessian covariance given vanishing gradients.

mod blocks;
mod conditional;
mod eigen;

pub use blocks::{
    det_a, printed_deviation, printed_series, sigma_blocks, sigma_blocks_unchecked, sigma_direct, sqrt_det_a_series, BlockCovariance, Entry, R_MIN,
    SERIES_RADIUS,
};
pub use conditional::{conditional_delta, schur_complement, ConditionalCovariance};
pub use eigen::{eigen_system, whitening, EigenSystem, EIGEN_NOISE_FLOOR};

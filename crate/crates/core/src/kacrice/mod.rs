//! Kac-Rice predictions: density, two-point function, near-diagonal constant,
//! type-restricted correlations and decay-exponent fits.

pub mod quadrature;

pub use quadrature::{BatchRunner, Method, QuadEstimate, Sequential, SphereQuadrature, SPHERE_AREA};

mod constants;

pub use constants::{
    a_f_identity, a_f_quotient, ab_squares, asymptotic_constants, b_sign, bc_coefficients, density_k1, expected_abs_det_hessian, mc_abs_det_y, phi, varphi, AsymptoticConstants,
    BcCoefficients, Density,
};

mod k2;

pub use k2::{
    k2, k2_with, line_integrals, pair_geometry, trace_det, typed_k2, typed_k2_table_with, typed_k2_with, K2Estimate, PairGeometry,
};

mod fit;

pub use fit::{decay_exponent_fit, grid, ExponentFit};

mod moment;

pub use moment::{
    disc_distance_density, gauss_legendre, second_factorial_moment, second_factorial_moment_by, second_factorial_moment_with, MOMENT_NODES,
};

//! Second factorial moment of the number of critical points in a disc.
//!
//! `E[N(N-1)] = int int_{B(R) x B(R)} K2(|x - y|) dx dy = (pi R^2)^2 E[K2(D)]`, where
//! `D` is the distance between two independent uniform points of the disc. With
//! `D = 2 R u` its density on `[0, 1]` is `16 u (acos u - u sqrt(1 - u^2)) / pi`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use super::k2::k2_with;
use super::quadrature::{BatchRunner, QuadEstimate, SphereQuadrature};
use crate::covariance::RadialKernel;
use crate::moments::R_MIN;
use crate::{Error, Result};

/// Default number of Gauss-Legendre nodes in the distance integral.
pub const MOMENT_NODES: usize = 16;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Density of `|x - y| / (2R)` for independent uniform points of a disc of radius `R`.
pub fn disc_distance_density(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    16.0 * u * (u.acos() - u * (1.0 - u * u).sqrt()) / PI
}

/// `int int_{B(R) x B(R)} K2(|x - y|)` for any two-point function given as `d -> (value, std_error)`.
/// Node errors are combined as independent.
pub fn second_factorial_moment_by<F>(radius: f64, nodes: usize, mut k2: F) -> Result<QuadEstimate>
where
    F: FnMut(usize, f64) -> Result<(f64, f64)>,
{
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("disc radius must be positive, got {radius}")));
    }
    let area2 = (PI * radius * radius).powi(2);
    let (mut value, mut var) = (0.0, 0.0);
    for (i, (u, w)) in gauss_legendre(nodes).into_iter().enumerate() {
        let weight = w * disc_distance_density(u);
        let (v, se) = k2(i, 2.0 * radius * u)?;
        value += weight * v;
        var += (weight * se).powi(2);
    }
    Ok(QuadEstimate { value: value * area2, std_error: var.sqrt() * area2, n_samples: 0 })
}

/// Second factorial moment of the critical point count in a disc of radius `radius`.
///
/// Each node uses its own seed (`quad.seed + node`); separations below the smallest
/// supported radius are evaluated at that radius, where `K2` is flat to `O(r^2)`.
pub fn second_factorial_moment_with<K, R>(kernel: &K, radius: f64, quad: &SphereQuadrature, runner: &R) -> Result<QuadEstimate>
where
    K: RadialKernel + ?Sized,
    R: BatchRunner + ?Sized,
{
    let mut n = 0;
    let mut e = second_factorial_moment_by(radius, MOMENT_NODES, |i, d| {
        let q = SphereQuadrature { seed: quad.seed.wrapping_add(i as u64), ..*quad };
        let k = k2_with(kernel, d.max(R_MIN), &q, runner)?;
        n += k.n_samples;
        Ok((k.value, k.std_error))
    })?;
    e.n_samples = n;
    Ok(e)
}

pub fn second_factorial_moment<K: RadialKernel + ?Sized>(kernel: &K, radius: f64, quad: &SphereQuadrature) -> Result<QuadEstimate> {
    second_factorial_moment_with(kernel, radius, quad, &super::Sequential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::Model;
    use crate::kacrice::{asymptotic_constants, Method};

    #[test]
    fn nodes_integrate_polynomials() {
        let gl = gauss_legendre(8);
        let s: f64 = gl.iter().map(|(x, w)| w * x.powi(15)).sum();
        assert!((s - 1.0 / 16.0).abs() < 1e-14);
        assert!(gl.windows(2).all(|p| p[0].0 < p[1].0));
    }

    #[test]
    fn distance_density_is_normalized() {
        let s: f64 = gauss_legendre(64).iter().map(|(u, w)| w * disc_distance_density(*u)).sum();
        assert!((s - 1.0).abs() < 1e-5, "{s}");
    }

    #[test]
    fn constant_two_point_function_gives_squared_area() {
        let e = second_factorial_moment_by(0.3, MOMENT_NODES, |_, _| Ok((2.0, 0.0))).unwrap();
        let want = 2.0 * (PI * 0.09).powi(2);
        assert!((e.value - want).abs() < 1e-4 * want);
    }

    #[test]
    fn zero_two_point_function_gives_zero() {
        let e = second_factorial_moment_by(0.05, MOMENT_NODES, |_, _| Ok((0.0, 0.0))).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn small_disc_scales_like_r4() {
        let q = SphereQuadrature::new(40_000, 3).with_method(Method::LineConditional);
        let e = second_factorial_moment(&Model::BargmannFock, 0.05, &q).unwrap();
        let c = asymptotic_constants(&crate::covariance::TaylorCoeffs::new(0.5, 1.0 / 6.0, 1.0 / 24.0)).unwrap();
        let ratio = e.value / (c.k2_limit * PI * PI * 0.05f64.powi(4));
        assert!((ratio - 1.0).abs() < 0.03, "{ratio}");
    }
}

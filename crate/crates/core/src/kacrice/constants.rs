//! Closed-form constants: density, Hessian moment, near-diagonal limit and the
//! small-separation expansion of Hessian trace and determinant.

use core::f64::consts::PI;
use num_traits::Float;

use super::quadrature::{BatchRunner, QuadEstimate, SphereQuadrature};
use crate::covariance::TaylorCoeffs;
use crate::{Error, Result};

const BRANCH_TOL: f64 = 1e-12;

fn sqrt3() -> f64 {
    3.0f64.sqrt()
}

/// Expected number of critical points per unit area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density {
    /// `8 g4 / (sqrt3 pi)` in normalized units.
    pub per_area: f64,
}

impl Density {
    /// Expected count in a disc of radius `radius`: `(8/sqrt3) g4 R^2`.
    pub fn count_in_disc(&self, radius: f64) -> f64 {
        self.per_area * PI * radius * radius
    }

    /// Density for the unnormalized field `C(r / s)` whose normalization recorded `s`.
    /// Lengths there are `s` times longer, so the density is divided by `s^2`.
    pub fn in_original_units(&self, length_scale: f64) -> f64 {
        self.per_area / (length_scale * length_scale)
    }
}

pub fn density_k1(coeffs: &TaylorCoeffs) -> Density {
    Density { per_area: 8.0 * coeffs.g4 / (sqrt3() * PI) }
}

/// `E|det H|` for the Hessian at a point: `32 g4 / sqrt3`.
pub fn expected_abs_det_hessian(coeffs: &TaylorCoeffs) -> f64 {
    32.0 * coeffs.g4 / sqrt3()
}

/// Monte Carlo estimate of `E|Y1 Y3 - Y2^2|` for `Y` with covariance rows
/// `(3,0,1), (0,1,0), (1,0,3)`; exact value `4/sqrt3`.
pub fn mc_abs_det_y<R: BatchRunner + ?Sized>(quad: &SphereQuadrature, runner: &R) -> QuadEstimate {
    let l31 = 1.0 / sqrt3();
    let l33 = (8.0f64 / 3.0).sqrt();
    quad.gaussian_mean(runner, |z| {
        let y1 = sqrt3() * z[0];
        let y2 = z[1];
        let y3 = l31 * z[0] + l33 * z[2];
        (y1 * y3 - y2 * y2).abs()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstants {
    pub phi: f64,
    pub varphi: f64,
    /// `A^2` and `B^2` before taking roots.
    pub a2: f64,
    pub b2: f64,
    pub a: f64,
    pub b: f64,
    /// `(sqrt3/pi^2) (A^2 + B^2) / sqrt(phi)`.
    pub a_f: f64,
    /// `(sqrt3/pi^2) (10 g6 - 4 g4^2)`.
    pub a_f_identity: f64,
    /// Limit of the sphere integral for `K2` as `r -> 0`, from its leading term:
    /// `12/(pi^5 16 sqrt3 g4) * 384 g4 (A^2+B^2)/sqrt(phi) * pi^3/48`.
    pub k2_limit: f64,
}

fn checked_sqrt(quantity: &'static str, value: f64) -> Result<f64> {
    if value < -BRANCH_TOL {
        return Err(Error::ComplexBranch { quantity, value });
    }
    Ok(value.max(0.0).sqrt())
}

pub fn phi(g4: f64, g6: f64) -> f64 {
    100.0 * g4.powi(4) - 396.0 * g4 * g4 * g6 + 405.0 * g6 * g6
}

pub fn varphi(g4: f64, g6: f64) -> f64 {
    -20.0 * g4.powi(4) + 88.0 * g4 * g4 * g6 - 99.0 * g6 * g6
}

/// `(A^2, B^2)`; both are real numbers even where the roots are not.
pub fn ab_squares(g4: f64, g6: f64) -> (f64, f64) {
    let shift = (2.0 * g4 * g4 - 5.0 * g6) * phi(g4, g6).max(0.0).sqrt();
    let v = varphi(g4, g6);
    (v - shift, -v - shift)
}

/// `(sqrt3/pi^2) (A^2 + B^2) / sqrt(phi)`, from the squares.
pub fn a_f_quotient(g4: f64, g6: f64) -> f64 {
    let root = phi(g4, g6).max(0.0).sqrt();
    let (a2, b2) = ab_squares(g4, g6);
    if root > 0.0 {
        sqrt3() / (PI * PI) * (a2 + b2) / root
    } else {
        0.0
    }
}

/// `(sqrt3/pi^2) (10 g6 - 4 g4^2)`.
pub fn a_f_identity(g4: f64, g6: f64) -> f64 {
    sqrt3() / (PI * PI) * (10.0 * g6 - 4.0 * g4 * g4)
}

/// Near-diagonal constants with real `A` and `B`.
///
/// `A^2 >= 0` exactly when `g4^2 <= (9/4) g6`, which every genuine field
/// satisfies (Cauchy-Schwarz on the spectral moments, equality for the random
/// wave model). Between `9/4` and `5/2` this returns [`Error::ComplexBranch`];
/// [`a_f_quotient`] and [`a_f_identity`] remain defined there.
pub fn asymptotic_constants(coeffs: &TaylorCoeffs) -> Result<AsymptoticConstants> {
    if !coeffs.normalized {
        return Err(Error::NotNormalized { g2: coeffs.g2 });
    }
    let (g4, g6) = (coeffs.g4, coeffs.g6);
    let phi = phi(g4, g6);
    let varphi = varphi(g4, g6);
    let root = phi.max(0.0).sqrt();
    let (a2, b2) = ab_squares(g4, g6);
    let a = checked_sqrt("A^2", a2)?;
    let b = checked_sqrt("B^2", b2)?;
    let s3 = sqrt3();
    let a_f = a_f_quotient(g4, g6);
    // E[s_i^2 s_j^2] = 1/48 on S^5 and |S^5| = pi^3
    let k2_limit = if root > 0.0 { 12.0 / (PI.powi(5) * 16.0 * s3) * 384.0 * (a2 + b2) / root * PI.powi(3) / 48.0 } else { 0.0 };
    Ok(AsymptoticConstants { phi, varphi, a2, b2, a, b, a_f, a_f_identity: a_f_identity(g4, g6), k2_limit })
}

/// First coefficients of `b1 = -(zeta1 + zeta3)` and `c1 = zeta1 zeta3 - zeta2^2`
/// in powers of `r`, evaluated at a point `s` of `S^5`.
///
/// The second point's coefficients follow from `b2,0 = b1,0`, `b2,1 = -b1,1`,
/// `b2,2 = b1,2`, `c2,0 = c1,0 = 0`, `c2,1 = -c1,1`, `c2,2 = c1,2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcCoefficients {
    pub b10: f64,
    pub b11: f64,
    pub b12: f64,
    pub c11: f64,
    pub c12: f64,
}

impl BcCoefficients {
    pub fn b21(&self) -> f64 {
        -self.b11
    }
    pub fn c21(&self) -> f64 {
        -self.c11
    }
}

/// Sign of `2 g4^2 - 3 g6`, taken as `+1` when it vanishes (Bargmann-Fock).
pub fn b_sign(coeffs: &TaylorCoeffs) -> f64 {
    if 2.0 * coeffs.g4 * coeffs.g4 - 3.0 * coeffs.g6 < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn bc_coefficients(coeffs: &TaylorCoeffs, s: &[f64; 6]) -> Result<BcCoefficients> {
    let (g4, g6, g8) = (coeffs.g4, coeffs.g6, coeffs.g8);
    let g8_branch = 280.0 * g4 * g8 - 153.0 * g6 * g6;
    if g8_branch < 0.0 {
        return Err(Error::G8BranchNegative { value: g8_branch });
    }
    let k = asymptotic_constants(coeffs)?;
    let (ph, root) = (k.phi, k.phi.sqrt());
    let quarter = root.sqrt();
    let sg = b_sign(coeffs);
    let t = 8.0 * g4 * g4 - 18.0 * g6;
    let u_plus = checked_sqrt("-10 g4^2 + 27 g6 + sqrt(phi)", -10.0 * g4 * g4 + 27.0 * g6 + root)?;
    let u_minus = checked_sqrt("-10 g4^2 + 27 g6 - sqrt(phi)", -10.0 * g4 * g4 + 27.0 * g6 - root)?;
    let v_plus = checked_sqrt("phi + (8 g4^2 - 18 g6) sqrt(phi)", ph + t * root)?;
    let v_minus = checked_sqrt("phi - (8 g4^2 - 18 g6) sqrt(phi)", ph - t * root)?;
    let w_plus = checked_sqrt("sqrt(phi) + 8 g4^2 - 18 g6", root + t)?;
    let w_minus = checked_sqrt("sqrt(phi) - (8 g4^2 - 18 g6)", root - t)?;
    let x_branch = checked_sqrt("280/3 g4 g8 - 51 g6^2", 280.0 / 3.0 * g4 * g8 - 51.0 * g6 * g6)?;
    let [x1, _x2, x3, x4, x5, x6] = *s;
    let lin = x3 * k.a + x4 * k.b;
    let s2 = 2.0f64.sqrt();
    let s3 = sqrt3();
    let rg4 = g4.sqrt();
    Ok(BcCoefficients {
        b10: -8.0 / s3 * rg4 * x6,
        b11: 3.0 * s2 / quarter * lin + s2 / root * sg * (-x4 * u_plus * v_plus + x3 * u_minus * v_minus),
        b12: 2.0 / s3 * g6 / rg4 * x6 + 1.0 / rg4 * x5 * g8_branch.sqrt(),
        c11: -8.0 * 6.0f64.sqrt() * rg4 / quarter * x6 * lin,
        c12: 4.0 * (2.0 * g4 * g4 - 9.0 * g6) * x1 * x1
            + 6.0 / root * sg * lin * (-x4 * u_plus * w_plus + x3 * u_minus * w_minus)
            + 8.0 * x6 * (g6 * x6 + x5 * x_branch),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{taylor_coeffs, Model};
    use crate::kacrice::Sequential;

    #[test]
    fn density_examples() {
        let rwm = density_k1(&TaylorCoeffs::new(0.25, 1.0 / 36.0, 1.0 / 576.0));
        assert!((rwm.per_area - 0.36755).abs() < 1e-5);
        assert!((rwm.count_in_disc(1.0) - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        let bf = density_k1(&TaylorCoeffs::new(0.5, 1.0 / 6.0, 1.0 / 24.0));
        assert!((bf.per_area - 4.0 / (3f64.sqrt() * PI)).abs() < 1e-15);
        assert!((bf.per_area - 0.73510).abs() < 1e-5);
        assert_eq!(density_k1(&TaylorCoeffs::new(0.0, 0.0, 0.0)).per_area, 0.0);
        assert!((expected_abs_det_hessian(&TaylorCoeffs::new(0.25, 0.1, 0.0)) - 8.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn abs_det_moment() {
        let e = mc_abs_det_y(&SphereQuadrature::new(200_000, 1), &Sequential);
        assert!((e.value - 4.0 / 3f64.sqrt()).abs() < 4.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn catalog_constants() {
        let rwm = asymptotic_constants(&taylor_coeffs(&Model::RandomWave).unwrap()).unwrap();
        assert!((rwm.phi - 1.0 / 64.0).abs() < 1e-16);
        assert!((rwm.varphi + 1.0 / 576.0).abs() < 1e-16);
        assert!(rwm.a.abs() < 1e-8);
        assert!((rwm.b - (1.0f64 / 288.0).sqrt()).abs() < 1e-14);
        assert!((rwm.a_f - 3f64.sqrt() / (36.0 * PI * PI)).abs() < 1e-15);
        assert!((rwm.a_f - rwm.a_f_identity).abs() < 1e-12 * rwm.a_f);
        assert!((rwm.k2_limit - 2.0 * rwm.a_f).abs() < 1e-14);

        let bf = asymptotic_constants(&taylor_coeffs(&Model::BargmannFock).unwrap()).unwrap();
        assert!((bf.phi - 1.0).abs() < 1e-14 && (bf.varphi + 1.0 / 3.0).abs() < 1e-14);
        assert!((bf.b - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert!((bf.a_f - 0.11699).abs() < 1e-5);

        // the Cauchy-Schwarz boundary has A^2 = -0.64, B^2 = 0.64
        assert!(a_f_quotient(1.0, 0.4).abs() < 1e-12 && a_f_identity(1.0, 0.4).abs() < 1e-12);
        assert!(matches!(asymptotic_constants(&TaylorCoeffs::new(1.0, 0.4, 0.1)), Err(Error::ComplexBranch { .. })));
    }

    #[test]
    fn roots_are_real_up_to_the_monochromatic_bound() {
        for i in 1..200 {
            let t = 2.25 * i as f64 / 200.0;
            let (a2, b2) = ab_squares(t.sqrt(), 1.0);
            assert!(a2 >= -1e-12 && b2 >= 0.0, "t={t}");
        }
        let (a2, _) = ab_squares(2.3f64.sqrt(), 1.0);
        assert!(a2 < 0.0);
    }

    #[test]
    fn rwm_first_order_trace_term_vanishes() {
        let c = taylor_coeffs(&Model::RandomWave).unwrap();
        let mut seed = 12345u64;
        for _ in 0..100 {
            let s: [f64; 6] = core::array::from_fn(|_| {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            });
            let s = crate::kacrice::quadrature::to_sphere(&s);
            let bc = bc_coefficients(&c, &s).unwrap();
            assert!(bc.b11.abs() <= 1e-10, "{}", bc.b11);
            assert_eq!(bc.c21(), -bc.c11);
        }
        let one = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert!((bc_coefficients(&c, &one).unwrap().b10 + 8.0 / 3f64.sqrt() * 0.5).abs() < 1e-14);
    }

    #[test]
    fn bargmann_fock_uses_positive_sign() {
        let c = taylor_coeffs(&Model::BargmannFock).unwrap();
        assert_eq!(b_sign(&c), 1.0);
        let bc = bc_coefficients(&c, &[0.1, 0.2, 0.3, 0.4, 0.5, (1.0f64 - 0.55).sqrt()]).unwrap();
        assert!(bc.b11.abs() > 1e-3);
    }

    #[test]
    fn negative_g8_branch_is_an_error() {
        let c = TaylorCoeffs::new(0.5, 1.0 / 6.0, 0.0);
        assert!(matches!(bc_coefficients(&c, &[0.0; 6]), Err(Error::G8BranchNegative { .. })));
    }
}

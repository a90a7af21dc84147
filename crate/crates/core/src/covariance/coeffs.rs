//! Taylor coefficients at the origin, normalization and admissibility.

use num_traits::Float;

use super::finite_diff;
use super::kernels::{RadialKernel, Scaled};
use crate::{Error, Result};

/// Relative tolerance for cross-checking independent derivative probes.
const PROBE_TOL: f64 = 1e-6;
const NEGATIVE_TOL: f64 = 1e-12;
const NORMALIZED_TOL: f64 = 1e-12;
const SLACK_TOL: f64 = 1e-12;

/// `g_{2k} = (-1)^k C^{(2k)}(0) / (2k)!` for `k = 1..4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCoeffs {
    pub g2: f64,
    pub g4: f64,
    pub g6: f64,
    pub g8: f64,
    pub normalized: bool,
    pub degenerate: bool,
}

impl TaylorCoeffs {
    /// Normalized coefficients (`g2 = 1`).
    pub fn new(g4: f64, g6: f64, g8: f64) -> Self {
        Self::from_raw(1.0, g4, g6, g8)
    }

    pub fn from_raw(g2: f64, g4: f64, g6: f64, g8: f64) -> Self {
        let mut c = TaylorCoeffs { g2, g4, g6, g8, normalized: false, degenerate: false };
        c.normalized = (g2 - 1.0).abs() <= NORMALIZED_TOL;
        c.degenerate = g2 <= 0.0 || c.slack() <= SLACK_TOL;
        c
    }

    /// Cauchy-Schwarz slack `(5/2) g2 g6 - g4^2`.
    pub fn slack(&self) -> f64 {
        2.5 * self.g2 * self.g6 - self.g4 * self.g4
    }

    /// Series coefficients `c_k` of `C(r) = sum c_k r^{2k}`, `k = 0..4`.
    pub fn series(&self) -> [f64; 5] {
        [1.0, -self.g2, self.g4, -self.g6, self.g8]
    }
}

fn check_sign(index: usize, value: f64) -> Result<()> {
    if value < -NEGATIVE_TOL {
        Err(Error::NegativeCoefficient { index, value })
    } else {
        Ok(())
    }
}

fn agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= PROBE_TOL * a.abs().max(b.abs()).max(1e-3)
}

/// Taylor coefficients of `kernel` at the origin.
///
/// Closed-form series are preferred and cross-checked against the kernel's own
/// derivatives; eval-only kernels use finite differences checked at two step sizes.
pub fn taylor_coeffs<K: RadialKernel + ?Sized>(kernel: &K) -> Result<TaylorCoeffs> {
    let factorial = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0];
    let mut g = [0.0; 4];
    let series: Option<[f64; 4]> = (|| Some([kernel.even_taylor(1)?, kernel.even_taylor(2)?, kernel.even_taylor(3)?, kernel.even_taylor(4)?]))();
    match series {
        Some(c) => {
            for k in 0..4 {
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                g[k] = sign * c[k];
            }
            for order in [2usize, 4] {
                let probe = kernel.deriv(0.0, order) / factorial[order];
                let expected = if order == 2 { -g[0] } else { g[1] };
                if !agree(probe, expected) {
                    return Err(Error::NonSmoothKernel { order, discrepancy: (probe - expected).abs() });
                }
            }
        }
        None => {
            let f = |x: f64| kernel.eval(x);
            for k in 0..4 {
                let order = 2 * (k + 1);
                let h = finite_diff::default_step(order);
                let coarse = finite_diff::richardson(&f, 0.0, order, h, 4).value;
                let fine = finite_diff::richardson(&f, 0.0, order, 0.5 * h, 4).value;
                // only the first two orders enter the Kac-Rice blocks; g6, g8 are diagnostic
                let tol = if k < 2 { PROBE_TOL } else { 1e-3 };
                if (coarse - fine).abs() > tol * coarse.abs().max(fine.abs()).max(1.0) {
                    return Err(Error::NonSmoothKernel { order, discrepancy: (coarse - fine).abs() });
                }
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                g[k] = sign * fine / factorial[order];
            }
            let d2 = -kernel.deriv(0.0, 2) / 2.0;
            if !agree(d2, g[0]) {
                return Err(Error::NonSmoothKernel { order: 2, discrepancy: (d2 - g[0]).abs() });
            }
        }
    }
    for (k, &v) in g.iter().enumerate() {
        check_sign(2 * (k + 1), v)?;
    }
    Ok(TaylorCoeffs::from_raw(g[0], g[1], g[2], g[3]))
}

/// Rescale space so that `g2 = 1`: returns `r -> C(s r)` with `s = 1/sqrt(g2)`.
pub fn normalize<K: RadialKernel>(kernel: K) -> Result<Scaled<K>> {
    let c = taylor_coeffs(&kernel)?;
    if c.g2 <= NORMALIZED_TOL {
        return Err(Error::DegenerateField);
    }
    if c.normalized {
        return Ok(Scaled::recorded(kernel, 1.0));
    }
    Ok(Scaled::recorded(kernel, 1.0 / c.g2.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub slack: f64,
    /// `g4^2 = (5/2) g6`: the near-diagonal constant vanishes.
    pub degenerate: bool,
    /// `2 g4^2 = 3 g6`: the sign factor in the first-order Hessian expansion is 0/0.
    pub warn_b_sign: bool,
    /// `280 g4 g8 < 153 g6^2`: a square root in the second-order expansion is imaginary.
    pub warn_g8: bool,
    /// `g4^2 > (9/4) g6`: no field has these coefficients (the spectral moments
    /// obey a sharper Cauchy-Schwarz bound), and `A` in the near-diagonal constant
    /// is imaginary.
    pub warn_unrealizable: bool,
}

pub fn check_admissibility(coeffs: &TaylorCoeffs) -> Result<AdmissibilityReport> {
    if !coeffs.normalized {
        return Err(Error::NotNormalized { g2: coeffs.g2 });
    }
    let slack = coeffs.slack();
    if slack < -SLACK_TOL {
        return Err(Error::InadmissibleCoefficients { slack });
    }
    let (g4, g6, g8) = (coeffs.g4, coeffs.g6, coeffs.g8);
    Ok(AdmissibilityReport {
        slack,
        degenerate: slack <= SLACK_TOL,
        warn_b_sign: (2.0 * g4 * g4 - 3.0 * g6).abs() <= 1e-10,
        warn_g8: 280.0 * g4 * g8 - 153.0 * g6 * g6 < 0.0,
        warn_unrealizable: g4 * g4 - 2.25 * g6 > SLACK_TOL,
    })
}

//! Closed-form eigen-decomposition of the conditional covariance.
//!
//! `Delta1 +- Delta2` are 3x3 matrices with an isolated middle entry, so the
//! spectrum splits into `A2-`, `A2+` and the eigenvalues of two 2x2 blocks.
//! Eigenvectors are `(u, -u)` for the minus blocks and `(u, u)` for the plus blocks.

use num_traits::Float;

use super::conditional::ConditionalCovariance;
use crate::linalg::{jacobi_eigen, Mat};
use crate::{Error, Result};

/// Below this, the closed-form eigenvector of a 2x2 block is numerically 0/0.
const DENOMINATOR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub r: f64,
    /// `lambda[0]` is `A2-`, `lambda[1]` is `A2+`, then the small and big roots of
    /// the minus block, then of the plus block.
    pub lambda: [f64; 6],
    /// Normalized eigenvectors as columns, in the order of `lambda`.
    pub q: Mat<6>,
    /// A 2x2 block had a vanishing off-diagonal entry and was solved generically.
    pub fallback: bool,
}

impl EigenSystem {
    pub fn column(&self, j: usize) -> [f64; 6] {
        core::array::from_fn(|i| self.q[i][j])
    }

    /// `Q diag(lambda) Q^t`.
    pub fn reconstruct(&self) -> Mat<6> {
        let mut m = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                m[i][j] = (0..6).map(|k| self.q[i][k] * self.lambda[k] * self.q[j][k]).sum();
            }
        }
        m
    }
}

/// `(A1, A2, A3, A4)` for the minus (`sign = -1`) or plus (`sign = +1`) combination.
fn combos(d: &ConditionalCovariance, sign: f64) -> [f64; 4] {
    let a = &d.a;
    let shift = if sign > 0.0 { 128.0 / 3.0 * d.g4 } else { 0.0 };
    [a[0] + sign * a[4] + shift, a[1] + sign * a[5], a[2] + sign * a[6], a[3] + sign * a[7]]
}

/// Eigen-pairs of `[[a, b], [b, c]]`: `(small, big, unit vector of big)`.
fn sym2(a: f64, b: f64, c: f64) -> (f64, f64, [f64; 2], bool) {
    if b.abs() <= DENOMINATOR_FLOOR {
        let (l, v) = jacobi_eigen(&[[a, b], [b, c]]);
        let (s, g) = if l[0] <= l[1] { (0, 1) } else { (1, 0) };
        return (l[s], l[g], [v[0][g], v[1][g]], true);
    }
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let big = if mean >= 0.0 { mean + rad } else { mean - rad };
    let other = if big != 0.0 { (a * c - b * b) / big } else { mean - rad };
    let (small, big) = if other <= big { (other, big) } else { (big, other) };
    let u = [b, big - a];
    let w = [big - c, b];
    let nu = u[0].hypot(u[1]);
    let nw = w[0].hypot(w[1]);
    let v = if nu >= nw { [u[0] / nu, u[1] / nu] } else { [w[0] / nw, w[1] / nw] };
    (small, big, v, false)
}

/// Eigenvalues in the fixed order, from the closed forms alone.
pub(crate) fn closed_form_eigenvalues(d: &ConditionalCovariance) -> [f64; 6] {
    let m = combos(d, -1.0);
    let p = combos(d, 1.0);
    let (l3, l4, _, _) = sym2(m[0], m[3], m[2]);
    let (l5, l6, _, _) = sym2(p[0], p[3], p[2]);
    [m[1], p[1], l3, l4, l5, l6]
}

fn fix_sign(v: &mut [f64; 6]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12 * norm) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub fn eigen_system(d: &ConditionalCovariance) -> EigenSystem {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let m = combos(d, -1.0);
    let p = combos(d, 1.0);
    let (l3, l4, vm, fm) = sym2(m[0], m[3], m[2]);
    let (l5, l6, vp, fp) = sym2(p[0], p[3], p[2]);
    let lift = |u: [f64; 2], sign: f64| -> [f64; 6] { [u[0] * h, 0.0, u[1] * h, sign * u[0] * h, 0.0, sign * u[1] * h] };
    let perp = |u: [f64; 2]| [-u[1], u[0]];
    let mut cols = [
        [0.0, h, 0.0, 0.0, -h, 0.0],
        [0.0, h, 0.0, 0.0, h, 0.0],
        lift(perp(vm), -1.0),
        lift(vm, -1.0),
        lift(perp(vp), 1.0),
        lift(vp, 1.0),
    ];
    cols.iter_mut().for_each(fix_sign);
    let q = core::array::from_fn(|i| core::array::from_fn(|j| cols[j][i]));
    EigenSystem { r: d.r, lambda: [m[1], p[1], l3, l4, l5, l6], q, fallback: fm || fp }
}

/// Eigenvalues this far below zero, relative to the largest, are rounding noise.
///
/// The random wave model obeys `H11 + H22 = -4F`, which leaves one conditional
/// direction with variance of order `r^10`: below double precision for `r < 0.1`.
pub const EIGEN_NOISE_FLOOR: f64 = 1e-12;

/// `M = Q Lambda^{1/2}`, so that `M xi` has covariance `Delta` for standard normal `xi`.
///
/// Eigenvalues within [`EIGEN_NOISE_FLOOR`] of zero are clamped to zero.
pub fn whitening(e: &EigenSystem) -> Result<Mat<6>> {
    let top = e.lambda.iter().fold(0.0f64, |acc, l| acc.max(*l));
    for (i, &l) in e.lambda.iter().enumerate() {
        if !(l >= -EIGEN_NOISE_FLOOR * top) || top <= 0.0 {
            return Err(Error::NonPositiveEigenvalue { index: i + 1, value: l });
        }
    }
    let root: [f64; 6] = core::array::from_fn(|j| e.lambda[j].max(0.0).sqrt());
    Ok(core::array::from_fn(|i| core::array::from_fn(|j| e.q[i][j] * root[j])))
}

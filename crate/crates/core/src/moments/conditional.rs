//! Covariance of the two Hessians conditioned on both gradients vanishing.

use super::blocks::{det_a, BlockCovariance};
use crate::linalg::{matmul, transpose, Lu, Mat};
use crate::{Error, Result};

/// `Delta(r) = [[Delta1, Delta2], [Delta2, Delta1]]` through the entries `a1..a8`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalCovariance {
    pub r: f64,
    pub g4: f64,
    /// `a[0]` is `a1`, ..., `a[7]` is `a8`.
    pub a: [f64; 8],
}

impl ConditionalCovariance {
    pub fn a(&self, i: usize) -> f64 {
        self.a[i - 1]
    }

    fn corner(&self) -> f64 {
        64.0 / 3.0 * self.g4
    }

    pub fn delta1(&self) -> Mat<3> {
        let a = &self.a;
        [[self.corner() + a[0], 0.0, a[3]], [0.0, a[1], 0.0], [a[3], 0.0, a[2]]]
    }

    pub fn delta2(&self) -> Mat<3> {
        let a = &self.a;
        [[self.corner() + a[4], 0.0, a[7]], [0.0, a[5], 0.0], [a[7], 0.0, a[6]]]
    }

    pub fn delta(&self) -> Mat<6> {
        let (d1, d2) = (self.delta1(), self.delta2());
        let mut m = [[0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = d1[i][j];
                m[i + 3][j + 3] = d1[i][j];
                m[i][j + 3] = d2[i][j];
                m[i + 3][j] = d2[i][j];
            }
        }
        m
    }
}

/// `a1..a8` from the block entries.
pub fn conditional_delta(blocks: &BlockCovariance) -> Result<ConditionalCovariance> {
    det_a(blocks)?;
    let (a1, a2) = (blocks.alpha1(), blocks.alpha2());
    let (b1, b2) = (blocks.beta1(), blocks.beta2());
    let (c2, c3) = (blocks.gamma2(), blocks.gamma3());
    let (gap1, gap2) = (blocks.gap1(), blocks.gap2());
    let g4 = blocks.g4;
    let a = [
        -2.0 * b1 * b1 / gap2 + 8.0 / 3.0 * g4,
        -2.0 * b1 * b1 / gap1 + 8.0 * g4,
        -2.0 * b2 * b2 / gap2 + 24.0 * g4,
        -2.0 * b1 * b2 / gap2 + 8.0 * g4,
        // gamma1 - 64 g4 / 3 taken from the deviation to avoid a cancellation
        blocks.deviation(super::Entry::Gamma1) + 8.0 / 3.0 * g4 - a2 * b1 * b1 / gap2,
        c2 - a1 * b1 * b1 / gap1,
        c3 - a2 * b2 * b2 / gap2,
        c2 - a2 * b1 * b2 / gap2,
    ];
    Ok(ConditionalCovariance { r: blocks.r, g4, a })
}

/// Schur complement `C - B^t A^{-1} B` of a 10x10 covariance, by a generic LU solve.
pub fn schur_complement(sigma: &Mat<10>) -> Result<Mat<6>> {
    let a: Mat<4> = core::array::from_fn(|i| core::array::from_fn(|j| sigma[i][j]));
    let b: [[f64; 6]; 4] = core::array::from_fn(|i| core::array::from_fn(|j| sigma[i][4 + j]));
    let c: Mat<6> = core::array::from_fn(|i| core::array::from_fn(|j| sigma[4 + i][4 + j]));
    let lu = Lu::new(&a);
    let det = lu.det();
    let x = lu.solve_mat(&b).ok_or(Error::DegenerateGradientPair { det })?;
    let btx = matmul(&transpose(&b), &x);
    Ok(core::array::from_fn(|i| core::array::from_fn(|j| c[i][j] - btx[i][j])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::Model;
    use crate::linalg::rel_diff;
    use crate::moments::sigma_blocks;
    use num_traits::Float;

    #[test]
    fn closed_forms_match_direct_schur_complement() {
        for m in Model::catalog() {
            for &r in &[0.05, 0.1, 0.3, 1.0] {
                let b = sigma_blocks(&m, r).unwrap();
                let d = conditional_delta(&b).unwrap().delta();
                let direct = schur_complement(&b.sigma()).unwrap();
                assert!(rel_diff(&d, &direct) < 1e-10, "{m} r={r}: {}", rel_diff(&d, &direct));
            }
        }
    }

    #[test]
    fn entries_vanish_quadratically() {
        for m in Model::catalog() {
            let max_a = |r: f64| {
                let d = conditional_delta(&sigma_blocks(&m, r).unwrap()).unwrap();
                d.a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
            };
            let (lo, hi) = (1e-3, 1e-1);
            let slope = (max_a(hi) / max_a(lo)).ln() / (hi / lo).ln();
            assert!(slope >= 1.9, "{m}: {slope}");
            if m == Model::RandomWave {
                assert!(max_a(0.01) <= 10.0 * 1e-4);
            }
        }
    }

    #[test]
    fn corner_entry_tends_to_limit() {
        let b = sigma_blocks(&Model::RandomWave, 1e-3).unwrap();
        let d = conditional_delta(&b).unwrap();
        assert!((d.delta2()[0][0] - 64.0 / 3.0 * 0.25).abs() < 1e-5);
    }
}

//! Joint covariance of gradients and Hessians at `x = (0,0)` and `y = (0,r)`.

use num_traits::Float;

use crate::covariance::{RadialKernel, TaylorCoeffs};
use crate::linalg::Mat;
use crate::{Error, Result};

/// Smallest radius evaluated without the series-only diagnostic path.
pub const R_MIN: f64 = 1e-3;
/// Below this radius kernels with a known Maclaurin series are summed termwise.
pub const SERIES_RADIUS: f64 = 0.5;
const SERIES_TERMS: usize = 40;

/// The seven `r`-dependent entries of the block covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entry {
    Alpha1,
    Alpha2,
    Beta1,
    Beta2,
    Gamma1,
    Gamma2,
    Gamma3,
}

impl Entry {
    pub const ALL: [Entry; 7] = [Entry::Alpha1, Entry::Alpha2, Entry::Beta1, Entry::Beta2, Entry::Gamma1, Entry::Gamma2, Entry::Gamma3];

    pub fn name(self) -> &'static str {
        match self {
            Entry::Alpha1 => "alpha1",
            Entry::Alpha2 => "alpha2",
            Entry::Beta1 => "beta1",
            Entry::Beta2 => "beta2",
            Entry::Gamma1 => "gamma1",
            Entry::Gamma2 => "gamma2",
            Entry::Gamma3 => "gamma3",
        }
    }

    /// Whether the printed truncation error is `O(r^5)` (the odd entries) rather than `O(r^6)`.
    pub fn is_beta(self) -> bool {
        matches!(self, Entry::Beta1 | Entry::Beta2)
    }
}

/// `Sigma(r)` in structured form.
///
/// Each entry is held as its `r -> 0` limit plus a deviation so that the small
/// differences `4 - alpha^2` and the conditional entries keep their relative accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCovariance {
    pub r: f64,
    /// `-C''(0)/2`, equal to 1 for a normalized kernel.
    pub g2: f64,
    /// `C''''(0)/24`; sets the `r`-independent Hessian block.
    pub g4: f64,
    limit: [f64; 7],
    dev: [f64; 7],
}

fn limits(g2: f64, g4: f64) -> [f64; 7] {
    [2.0 * g2, 2.0 * g2, 0.0, 0.0, 24.0 * g4, 8.0 * g4, 24.0 * g4]
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64)
}

impl BlockCovariance {
    /// Entries from the Maclaurin coefficients `c[k]` of `C(r) = sum c_k r^{2k}`.
    pub fn from_series(c: &[f64], r: f64) -> Self {
        let coeff = |k: usize| c.get(k).copied().unwrap_or(0.0);
        let (g2, g4) = (-coeff(1), coeff(2));
        let mut dev = [0.0; 7];
        let r2 = r * r;
        // alpha: k >= 2; beta: k >= 2 (zero limit); gamma: k >= 3
        let mut p = 1.0; // r^{2k-4}
        for k in 2..c.len().max(3) {
            let ck = coeff(k);
            let kf = k as f64;
            let n = 2 * k;
            let rk2 = p * r2; // r^{2k-2}
            dev[0] -= 2.0 * kf * ck * rk2;
            dev[1] -= falling(n, 2) * ck * rk2;
            dev[2] -= 4.0 * kf * (kf - 1.0) * ck * p * r;
            dev[3] -= falling(n, 3) * ck * p * r;
            if k >= 3 {
                dev[4] += 12.0 * kf * (kf - 1.0) * ck * p;
                dev[5] += 4.0 * kf * (kf - 1.0) * (2.0 * kf - 3.0) * ck * p;
                dev[6] += falling(n, 4) * ck * p;
            }
            p *= r2;
        }
        BlockCovariance { r, g2, g4, limit: limits(g2, g4), dev }
    }

    /// Entries from the radial derivatives `d[k] = C^{(k)}(r)`, `k = 1..4`.
    pub fn from_derivatives(d: [f64; 4], g2: f64, g4: f64, r: f64) -> Self {
        let [c1, c2, c3, c4] = d;
        let values = [
            -c1 / r,
            -c2,
            -(c2 - c1 / r) / r,
            -c3,
            3.0 * (c2 - c1 / r) / (r * r),
            c3 / r - 2.0 * c2 / (r * r) + 2.0 * c1 / (r * r * r),
            c4,
        ];
        let limit = limits(g2, g4);
        let dev = core::array::from_fn(|i| values[i] - limit[i]);
        BlockCovariance { r, g2, g4, limit, dev }
    }

    pub fn get(&self, e: Entry) -> f64 {
        self.limit[e as usize] + self.dev[e as usize]
    }

    /// Deviation of an entry from its `r -> 0` limit.
    pub fn deviation(&self, e: Entry) -> f64 {
        self.dev[e as usize]
    }

    /// Adds `delta` to one entry. Used for fault injection.
    pub fn perturb(&mut self, e: Entry, delta: f64) {
        self.dev[e as usize] += delta;
    }

    pub fn alpha1(&self) -> f64 {
        self.get(Entry::Alpha1)
    }
    pub fn alpha2(&self) -> f64 {
        self.get(Entry::Alpha2)
    }
    pub fn beta1(&self) -> f64 {
        self.get(Entry::Beta1)
    }
    pub fn beta2(&self) -> f64 {
        self.get(Entry::Beta2)
    }
    pub fn gamma1(&self) -> f64 {
        self.get(Entry::Gamma1)
    }
    pub fn gamma2(&self) -> f64 {
        self.get(Entry::Gamma2)
    }
    pub fn gamma3(&self) -> f64 {
        self.get(Entry::Gamma3)
    }

    fn gap(&self, e: Entry) -> f64 {
        let i = e as usize;
        // (2 - alpha)(2 + alpha) with 2 - alpha formed from the deviation
        let minus = (2.0 - self.limit[i]) - self.dev[i];
        minus * (2.0 + self.get(e))
    }

    /// `4 - alpha1^2`.
    pub fn gap1(&self) -> f64 {
        self.gap(Entry::Alpha1)
    }

    /// `4 - alpha2^2`.
    pub fn gap2(&self) -> f64 {
        self.gap(Entry::Alpha2)
    }

    /// The assembled 10x10 covariance of
    /// `(dF(x), dF(y), H11 H12 H22 at x, H11 H12 H22 at y)`.
    pub fn sigma(&self) -> Mat<10> {
        let mut s = [[0.0; 10]; 10];
        let two = 2.0 * self.g2;
        let (a1, a2, b1, b2) = (self.alpha1(), self.alpha2(), self.beta1(), self.beta2());
        let (c1, c2, c3) = (self.gamma1(), self.gamma2(), self.gamma3());
        // gradient block
        s[0][0] = two;
        s[1][1] = two;
        s[2][2] = two;
        s[3][3] = two;
        s[0][2] = a1;
        s[1][3] = a2;
        // gradient at x against Hessian at y is B(r); gradient at y against Hessian at x is -B(r)
        let b = [[0.0, b1, 0.0], [b1, 0.0, b2]];
        for i in 0..2 {
            for j in 0..3 {
                s[i][7 + j] = b[i][j];
                s[2 + i][4 + j] = -b[i][j];
            }
        }
        let g4 = self.g4;
        let c0 = [[24.0 * g4, 0.0, 8.0 * g4], [0.0, 8.0 * g4, 0.0], [8.0 * g4, 0.0, 24.0 * g4]];
        let cr = [[c1, 0.0, c2], [0.0, c2, 0.0], [c2, 0.0, c3]];
        for i in 0..3 {
            for j in 0..3 {
                s[4 + i][4 + j] = c0[i][j];
                s[7 + i][7 + j] = c0[i][j];
                s[4 + i][7 + j] = cr[i][j];
            }
        }
        for i in 0..10 {
            for j in 0..i {
                s[i][j] = s[j][i];
            }
        }
        s
    }
}

/// Maclaurin coefficients of a kernel, if it has a closed-form series.
pub(crate) fn kernel_series<K: RadialKernel + ?Sized>(kernel: &K) -> Option<[f64; SERIES_TERMS]> {
    let mut c = [0.0; SERIES_TERMS];
    for (k, slot) in c.iter_mut().enumerate() {
        *slot = kernel.even_taylor(k)?;
    }
    Some(c)
}

/// `(g2, g4)` read from the kernel at the origin.
pub(crate) fn origin_coeffs<K: RadialKernel + ?Sized>(kernel: &K) -> (f64, f64) {
    match (kernel.even_taylor(1), kernel.even_taylor(2)) {
        (Some(c1), Some(c2)) => (-c1, c2),
        _ => (-kernel.deriv(0.0, 2) / 2.0, kernel.deriv(0.0, 4) / 24.0),
    }
}

/// Block covariance at separation `r` without the positivity probe.
pub fn sigma_blocks_unchecked<K: RadialKernel + ?Sized>(kernel: &K, r: f64) -> BlockCovariance {
    if r <= SERIES_RADIUS {
        if let Some(c) = kernel_series(kernel) {
            return BlockCovariance::from_series(&c, r);
        }
    }
    let (g2, g4) = origin_coeffs(kernel);
    let d = [kernel.deriv(r, 1), kernel.deriv(r, 2), kernel.deriv(r, 3), kernel.deriv(r, 4)];
    BlockCovariance::from_derivatives(d, g2, g4, r)
}

/// Block covariance at separation `r`, checked for radius range and positivity.
pub fn sigma_blocks<K: RadialKernel + ?Sized>(kernel: &K, r: f64) -> Result<BlockCovariance> {
    if !(r >= R_MIN) || !r.is_finite() {
        return Err(Error::RadiusTooSmall { r, r_min: R_MIN });
    }
    let blocks = sigma_blocks_unchecked(kernel, r);
    if (blocks.g2 - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { g2: blocks.g2 });
    }
    if !(blocks.gap1() > 0.0 && blocks.gap2() > 0.0) {
        return Err(Error::RadiusTooLarge { r });
    }
    let delta = super::conditional_delta(&blocks)?;
    let lambda = super::eigen::closed_form_eigenvalues(&delta);
    let scale = 64.0 * blocks.g4.abs().max(1e-300);
    if lambda.iter().any(|&l| l < -1e-9 * scale) {
        return Err(Error::RadiusTooLarge { r });
    }
    Ok(blocks)
}

/// `det A(r) = (4 - alpha1^2)(4 - alpha2^2)`.
pub fn det_a(blocks: &BlockCovariance) -> Result<f64> {
    let det = blocks.gap1() * blocks.gap2();
    if !(det > 1e-300) {
        return Err(Error::DegenerateGradientPair { det });
    }
    Ok(det)
}

/// The truncated series printed for each entry (through `r^4` for alpha and
/// gamma, through `r^3` for beta).
pub fn printed_series(c: &TaylorCoeffs, r: f64, e: Entry) -> f64 {
    limits(1.0, c.g4)[e as usize] + printed_deviation(c, r, e)
}

/// [`printed_series`] minus its `r = 0` value, without forming the constant.
pub fn printed_deviation(c: &TaylorCoeffs, r: f64, e: Entry) -> f64 {
    let (g4, g6, g8) = (c.g4, c.g6, c.g8);
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    match e {
        Entry::Alpha1 => -4.0 * g4 * r2 + 6.0 * g6 * r4,
        Entry::Alpha2 => -12.0 * g4 * r2 + 30.0 * g6 * r4,
        Entry::Beta1 => -8.0 * g4 * r + 24.0 * g6 * r3,
        Entry::Beta2 => -24.0 * g4 * r + 120.0 * g6 * r3,
        Entry::Gamma1 => -72.0 * g6 * r2 + 144.0 * g8 * r4,
        Entry::Gamma2 => -72.0 * g6 * r2 + 240.0 * g8 * r4,
        Entry::Gamma3 => -360.0 * g6 * r2 + 1680.0 * g8 * r4,
    }
}

/// Two-term series of `sqrt(det A(r))`.
pub fn sqrt_det_a_series(c: &TaylorCoeffs, r: f64) -> f64 {
    let s3 = 3.0f64.sqrt();
    16.0 * s3 * c.g4 * r * r - 32.0 * s3 * (c.g4 * c.g4 + c.g6) * r.powi(4)
}

/// Radial derivatives of `G(u) = C(sqrt(2u))` at `u = rho^2/2`, orders 1..4.
fn g_derivatives<K: RadialKernel + ?Sized>(kernel: &K, rho: f64) -> [f64; 4] {
    if rho == 0.0 {
        // G(u) = sum c_k (2u)^k
        let c = |k: usize| -> f64 {
            kernel.even_taylor(k).unwrap_or_else(|| {
                let f = [1.0, 2.0, 24.0, 720.0, 40320.0][k];
                kernel.deriv(0.0, 2 * k) / f
            })
        };
        return [2.0 * c(1), 8.0 * c(2), 48.0 * c(3), 384.0 * c(4)];
    }
    let d1 = kernel.deriv(rho, 1);
    let d2 = kernel.deriv(rho, 2);
    let d3 = kernel.deriv(rho, 3);
    let d4 = kernel.deriv(rho, 4);
    let p = rho;
    [
        d1 / p,
        (d2 - d1 / p) / (p * p),
        (d3 - 3.0 * d2 / p + 3.0 * d1 / (p * p)) / (p * p * p),
        (d4 - 6.0 * d3 / p + 15.0 * d2 / (p * p) - 15.0 * d1 / (p * p * p)) / (p * p * p * p),
    ]
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Mixed partial `d^{idx} K(z)` of `K(z) = C(|z|)` for up to four indices.
fn tensor_derivative(g: &[f64; 4], z: [f64; 2], idx: &[usize]) -> f64 {
    let [g1, g2, g3, g4] = *g;
    match *idx {
        [] => f64::NAN,
        [i] => g1 * z[i],
        [i, j] => g2 * z[i] * z[j] + g1 * delta(i, j),
        [i, j, k] => g3 * z[i] * z[j] * z[k] + g2 * (delta(i, j) * z[k] + delta(i, k) * z[j] + delta(j, k) * z[i]),
        [i, j, k, l] => {
            g4 * z[i] * z[j] * z[k] * z[l]
                + g3 * (delta(i, j) * z[k] * z[l]
                    + delta(i, k) * z[j] * z[l]
                    + delta(i, l) * z[j] * z[k]
                    + delta(j, k) * z[i] * z[l]
                    + delta(j, l) * z[i] * z[k]
                    + delta(k, l) * z[i] * z[j])
                + g2 * (delta(i, j) * delta(k, l) + delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k))
        }
        _ => f64::NAN,
    }
}

/// The 10x10 covariance at two arbitrary points, assembled from tensor
/// derivatives of the kernel. Independent of the structured block formulas.
pub fn sigma_direct<K: RadialKernel + ?Sized>(kernel: &K, x: [f64; 2], y: [f64; 2]) -> Mat<10> {
    // (point, derivative multi-index)
    const OPS: [(usize, &[usize]); 10] = [
        (0, &[0]),
        (0, &[1]),
        (1, &[0]),
        (1, &[1]),
        (0, &[0, 0]),
        (0, &[0, 1]),
        (0, &[1, 1]),
        (1, &[0, 0]),
        (1, &[0, 1]),
        (1, &[1, 1]),
    ];
    let pts = [x, y];
    let z = [x[0] - y[0], x[1] - y[1]];
    let rho = (z[0] * z[0] + z[1] * z[1]).sqrt();
    let g_zero = g_derivatives(kernel, 0.0);
    let g_far = g_derivatives(kernel, rho);
    let mut s = [[0.0; 10]; 10];
    for (a, &(pa, ia)) in OPS.iter().enumerate() {
        for (b, &(pb, ib)) in OPS.iter().enumerate() {
            let mut idx = [0usize; 4];
            idx[..ia.len()].copy_from_slice(ia);
            idx[ia.len()..ia.len() + ib.len()].copy_from_slice(ib);
            let idx = &idx[..ia.len() + ib.len()];
            let diff = [pts[pa][0] - pts[pb][0], pts[pa][1] - pts[pb][1]];
            let g = if pa == pb { &g_zero } else { &g_far };
            let sign = if ib.len() % 2 == 0 { 1.0 } else { -1.0 };
            s[a][b] = sign * tensor_derivative(g, diff, idx);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{taylor_coeffs, Model};
    use crate::linalg::{rel_diff, Lu};

    #[test]
    fn rwm_alpha1_example() {
        let b = sigma_blocks(&Model::RandomWave, 0.1).unwrap();
        let exact = 2.0 * libm::j1(0.2) / 0.1;
        assert!((b.alpha1() - exact).abs() < 1e-14);
        assert!((b.alpha1() - 1.9900167).abs() < 1e-7);
    }

    #[test]
    fn series_and_derivative_paths_agree() {
        for m in Model::catalog() {
            let c = kernel_series(&m).unwrap();
            for &r in &[0.05, 0.2, 0.45] {
                let s = BlockCovariance::from_series(&c, r);
                let (g2, g4) = origin_coeffs(&m);
                let d = BlockCovariance::from_derivatives([m.deriv(r, 1), m.deriv(r, 2), m.deriv(r, 3), m.deriv(r, 4)], g2, g4, r);
                for e in Entry::ALL {
                    let tol = 1e-11 * s.get(e).abs().max(1.0) / (r * r);
                    assert!((s.get(e) - d.get(e)).abs() < tol, "{m} r={r} {e:?}: {} vs {}", s.get(e), d.get(e));
                }
            }
        }
    }

    #[test]
    fn assembled_sigma_matches_tensor_derivatives() {
        for m in Model::catalog() {
            for &r in &[0.05, 0.3, 0.7, 1.5] {
                let b = sigma_blocks(&m, r).unwrap();
                let direct = sigma_direct(&m, [0.0, 0.0], [0.0, r]);
                assert!(rel_diff(&b.sigma(), &direct) < 1e-10, "{m} r={r}");
            }
        }
    }

    #[test]
    fn sigma_is_rotation_invariant_in_the_determinant() {
        let m = Model::BargmannFock;
        let r = 0.4;
        let a = sigma_direct(&m, [0.0, 0.0], [0.0, r]);
        let th = 0.7f64;
        let b = sigma_direct(&m, [0.3, -0.2], [0.3 + r * th.sin(), -0.2 + r * th.cos()]);
        let da = Lu::new(&a).det();
        let db = Lu::new(&b).det();
        assert!((da - db).abs() < 1e-9 * da.abs());
    }

    #[test]
    fn det_a_matches_generic_determinant() {
        for m in Model::catalog() {
            for &r in &[0.01, 0.1, 0.5, 1.0] {
                let b = sigma_blocks(&m, r).unwrap();
                let s = b.sigma();
                let a4: Mat<4> = core::array::from_fn(|i| core::array::from_fn(|j| s[i][j]));
                let generic = Lu::new(&a4).det();
                let closed = det_a(&b).unwrap();
                assert!((closed - generic).abs() < 1e-12 * closed.max(1e-300) / (r * r), "{m} r={r}");
            }
        }
    }

    #[test]
    fn sqrt_det_a_leading_term() {
        let c = taylor_coeffs(&Model::RandomWave).unwrap();
        let b = sigma_blocks(&Model::RandomWave, 0.05).unwrap();
        let s = det_a(&b).unwrap().sqrt();
        let lead = 16.0 * 3f64.sqrt() * 0.25 * 0.0025;
        // the r^4 correction is 0.18% of the leading term at this radius
        assert!((s - lead).abs() < 2e-3 * lead, "{s} vs {lead}");
        assert!((s - sqrt_det_a_series(&c, 0.05)).abs() < 1e-3 * lead);
    }

    #[test]
    fn limits_as_r_vanishes() {
        let b = sigma_blocks(&Model::BargmannFock, R_MIN).unwrap();
        assert!((b.alpha1() - 2.0).abs() < 1e-5 && (b.alpha2() - 2.0).abs() < 1e-5);
        assert!(b.beta1().abs() < 1e-2 && b.beta2().abs() < 1e-1);
        assert!((b.gamma2() - 4.0).abs() < 1e-4);
        assert!(matches!(sigma_blocks(&Model::BargmannFock, 5e-4), Err(Error::RadiusTooSmall { .. })));
    }

    #[test]
    fn polynomial_kernel_fails_positivity_far_out() {
        let m = Model::Polynomial { g4: 0.25, g6: 1.0 / 36.0, g8: 1.0 / 576.0 };
        assert!(sigma_blocks(&m, 0.05).is_ok());
        assert!(matches!(sigma_blocks(&m, 6.0), Err(Error::RadiusTooLarge { .. })));
    }
}

//! The two-point function of critical points by the sphere-reduced Kac-Rice integral.
//!
//! With `zeta = M xi` the whitened conditional Hessians and `xi` standard normal,
//! `K2(r) = E|c1 c2| / (4 pi^2 sqrt(det A))`, where `c1 = zeta1 zeta3 - zeta2^2` and
//! `c2 = zeta4 zeta6 - zeta5^2`. Integrating out `|xi|` (`E|xi|^4 = 48`) leaves
//! `12 / (pi^5 sqrt(det A)) * int_{S^5} |c1 c2| ds`.

use core::f64::consts::PI;
use num_traits::Float;

use super::quadrature::{BatchRunner, Method, QuadEstimate, SphereQuadrature, SPHERE_AREA};
use crate::covariance::RadialKernel;
use crate::linalg::{matvec, Mat};
use crate::moments::{conditional_delta, det_a, eigen_system, sigma_blocks, whitening, EigenSystem};
use crate::normal;
use crate::types::{classify, PointType, TypePair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K2Estimate {
    pub r: f64,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub type_pair: Option<TypePair>,
}

/// Everything the integrand needs at one separation.
#[derive(Debug, Clone, Copy)]
pub struct PairGeometry {
    pub r: f64,
    pub sqrt_det_a: f64,
    pub eigen: EigenSystem,
    /// `M = Q Lambda^{1/2}`.
    pub whitening: Mat<6>,
    /// Coordinate of `xi` integrated in closed form by the line-conditional method:
    /// the direction of the largest eigenvalue.
    pub line_axis: usize,
}

pub fn pair_geometry<K: RadialKernel + ?Sized>(kernel: &K, r: f64) -> Result<PairGeometry> {
    let blocks = sigma_blocks(kernel, r)?;
    let det = det_a(&blocks)?;
    let delta = conditional_delta(&blocks)?;
    let eigen = eigen_system(&delta);
    let w = whitening(&eigen)?;
    let line_axis = (0..6).max_by(|&i, &j| eigen.lambda[i].total_cmp(&eigen.lambda[j])).unwrap_or(5);
    Ok(PairGeometry { r, sqrt_det_a: det.sqrt(), eigen, whitening: w, line_axis })
}

impl PairGeometry {
    /// Factor turning `int_{S^5} |c1 c2| ds` into `K2`.
    pub fn sphere_prefactor(&self) -> f64 {
        12.0 / (PI.powi(5) * self.sqrt_det_a)
    }

    /// Factor turning `E|c1 c2|` over standard normal `xi` into `K2`.
    pub fn gaussian_prefactor(&self) -> f64 {
        1.0 / (4.0 * PI * PI * self.sqrt_det_a)
    }

    pub fn zeta(&self, xi: &[f64; 6]) -> [f64; 6] {
        matvec(&self.whitening, xi)
    }

    /// Column of `M` along the line axis.
    fn line_direction(&self) -> [f64; 6] {
        core::array::from_fn(|i| self.whitening[i][self.line_axis])
    }
}

/// `(b1, c1, b2, c2)` of the two Hessians.
pub fn trace_det(zeta: &[f64; 6]) -> (f64, f64, f64, f64) {
    (-(zeta[0] + zeta[2]), zeta[0] * zeta[2] - zeta[1] * zeta[1], -(zeta[3] + zeta[5]), zeta[3] * zeta[5] - zeta[4] * zeta[4])
}

/// `|c1 c2|` placed in the slot of the ordered type pair (`3 * first + second`).
fn typed_point(zeta: &[f64; 6]) -> [f64; 9] {
    let (b1, c1, b2, c2) = trace_det(zeta);
    let mut out = [0.0; 9];
    if let (Some(t1), Some(t2)) = (classify(b1, c1), classify(b2, c2)) {
        out[3 * t1.index() + t2.index()] = (c1 * c2).abs();
    }
    out
}

/// Quadratic in `t`: `q[0] + q[1] t + q[2] t^2`.
fn push_quadratic_roots(q: [f64; 3], roots: &mut [f64; 8], n: &mut usize) {
    let [c, b, a] = q;
    if a == 0.0 {
        if b != 0.0 {
            roots[*n] = -c / b;
            *n += 1;
        }
        return;
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return;
    }
    let s = -0.5 * (b + b.signum() * disc.sqrt());
    if s != 0.0 {
        roots[*n] = s / a;
        roots[*n + 1] = c / s;
        *n += 2;
    } else {
        roots[*n] = 0.0;
        *n += 1;
    }
}

/// `int |c1(t) c2(t)| phi(t) dt` along `zeta(t) = z + t m`, split by the type pair
/// of the two Hessians. The sign pattern is constant between consecutive roots
/// of `b1, c1, b2, c2`, so each piece is a polynomial against a truncated normal.
pub fn line_integrals(z: &[f64; 6], m: &[f64; 6]) -> [f64; 9] {
    let det_coeffs = |i: usize| -> [f64; 3] {
        let (a, b, c) = (i, i + 1, i + 2);
        [z[a] * z[c] - z[b] * z[b], z[a] * m[c] + z[c] * m[a] - 2.0 * z[b] * m[b], m[a] * m[c] - m[b] * m[b]]
    };
    let p = det_coeffs(0);
    let q = det_coeffs(3);
    let tr1 = [-(z[0] + z[2]), -(m[0] + m[2])];
    let tr2 = [-(z[3] + z[5]), -(m[3] + m[5])];
    let poly = [
        p[0] * q[0],
        p[0] * q[1] + p[1] * q[0],
        p[0] * q[2] + p[1] * q[1] + p[2] * q[0],
        p[1] * q[2] + p[2] * q[1],
        p[2] * q[2],
    ];

    let mut roots = [0.0; 8];
    let mut n = 0;
    push_quadratic_roots(p, &mut roots, &mut n);
    push_quadratic_roots(q, &mut roots, &mut n);
    for tr in [tr1, tr2] {
        if tr[1] != 0.0 {
            roots[n] = -tr[0] / tr[1];
            n += 1;
        }
    }
    let roots = &mut roots[..n];
    roots.sort_unstable_by(f64::total_cmp);

    let mut out = [0.0; 9];
    let mut lo = f64::NEG_INFINITY;
    for k in 0..=roots.len() {
        let hi = if k < roots.len() { roots[k] } else { f64::INFINITY };
        if hi <= lo {
            continue;
        }
        let mid = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (false, true) => hi - 1.0,
            (true, false) => lo + 1.0,
            (false, false) => 0.0,
        };
        let eval = |c: [f64; 3]| c[0] + mid * (c[1] + mid * c[2]);
        let c1 = eval(p);
        let c2 = eval(q);
        let b1 = tr1[0] + mid * tr1[1];
        let b2 = tr2[0] + mid * tr2[1];
        if let (Some(t1), Some(t2)) = (classify(b1, c1), classify(b2, c2)) {
            let mom = normal::truncated_moments::<5>(lo, hi);
            let v: f64 = poly.iter().zip(mom.iter()).map(|(a, b)| a * b).sum();
            out[3 * t1.index() + t2.index()] += v.abs();
        }
        lo = hi;
    }
    out
}

/// Per-sample contribution to all nine ordered type pairs, scaled so that its
/// mean is `K2` restricted to that pair.
fn typed_sample(g: &PairGeometry, method: Method, xi: &[f64; 6]) -> [f64; 9] {
    match method {
        Method::LineConditional => {
            let mut x = *xi;
            x[g.line_axis] = 0.0;
            let z = g.zeta(&x);
            let m = g.line_direction();
            let pref = g.gaussian_prefactor();
            line_integrals(&z, &m).map(|v| v * pref)
        }
        Method::PlainMc | Method::RandomizedQmc => {
            let s = super::quadrature::to_sphere(xi);
            let pref = g.sphere_prefactor() * SPHERE_AREA;
            typed_point(&g.zeta(&s)).map(|v| v * pref)
        }
    }
}

fn finish(r: f64, e: QuadEstimate, quad: &SphereQuadrature, type_pair: Option<TypePair>) -> Result<K2Estimate> {
    if let Some(tol) = quad.tolerance {
        let rel = e.rel_error();
        if !(rel <= tol) {
            return Err(Error::QuadratureUnderResolved { r, rel_error: rel, tolerance: tol });
        }
    }
    Ok(K2Estimate { r, value: e.value.max(0.0), std_error: e.std_error, n_samples: e.n_samples, seed: quad.seed, type_pair })
}

/// `K2(r)` for the unrestricted pair of critical points.
pub fn k2_with<K, R>(kernel: &K, r: f64, quad: &SphereQuadrature, runner: &R) -> Result<K2Estimate>
where
    K: RadialKernel + ?Sized,
    R: BatchRunner + ?Sized,
{
    let g = pair_geometry(kernel, r)?;
    let e = match quad.method {
        Method::LineConditional => quad.gaussian_mean(runner, |xi| typed_sample(&g, quad.method, xi).iter().sum()),
        _ => {
            let pref = g.sphere_prefactor();
            quad.integrate(runner, |s| {
                let (_, c1, _, c2) = trace_det(&g.zeta(s));
                (c1 * c2).abs()
            })
            .scaled(pref)
        }
    };
    finish(r, e, quad, None)
}

pub fn k2<K: RadialKernel + ?Sized>(kernel: &K, r: f64, quad: &SphereQuadrature) -> Result<K2Estimate> {
    k2_with(kernel, r, quad, &super::Sequential)
}

/// `K2(r)` restricted to an ordered pair of critical point types.
pub fn typed_k2_with<K, R>(kernel: &K, r: f64, pair: TypePair, quad: &SphereQuadrature, runner: &R) -> Result<K2Estimate>
where
    K: RadialKernel + ?Sized,
    R: BatchRunner + ?Sized,
{
    let g = pair_geometry(kernel, r)?;
    let mask: [bool; 9] = core::array::from_fn(|i| pair.contains(PointType::ALL[i / 3], PointType::ALL[i % 3]));
    let e = quad.gaussian_mean(runner, |xi| {
        let v = typed_sample(&g, quad.method, xi);
        v.iter().zip(mask).filter(|(_, keep)| *keep).map(|(x, _)| x).sum()
    });
    finish(r, e, quad, Some(pair))
}

pub fn typed_k2<K: RadialKernel + ?Sized>(kernel: &K, r: f64, pair: TypePair, quad: &SphereQuadrature) -> Result<K2Estimate> {
    typed_k2_with(kernel, r, pair, quad, &super::Sequential)
}

/// All nine ordered `(min|max|saddle)^2` restrictions from one set of samples,
/// indexed `[first][second]` in the order min, max, saddle.
pub fn typed_k2_table_with<K, R>(kernel: &K, r: f64, quad: &SphereQuadrature, runner: &R) -> Result<[[K2Estimate; 3]; 3]>
where
    K: RadialKernel + ?Sized,
    R: BatchRunner + ?Sized,
{
    use crate::types::TypeClass;
    let g = pair_geometry(kernel, r)?;
    let est = quad.gaussian_means::<9, _, _>(runner, |xi| typed_sample(&g, quad.method, xi));
    let class = |t: PointType| match t {
        PointType::Min => TypeClass::Min,
        PointType::Max => TypeClass::Max,
        PointType::Saddle => TypeClass::Saddle,
    };
    let mut out = [[K2Estimate { r, value: 0.0, std_error: 0.0, n_samples: 0, seed: quad.seed, type_pair: None }; 3]; 3];
    for (i, t1) in PointType::ALL.iter().enumerate() {
        for (j, t2) in PointType::ALL.iter().enumerate() {
            let e = est[3 * i + j];
            out[i][j] = K2Estimate {
                r,
                value: e.value.max(0.0),
                std_error: e.std_error,
                n_samples: e.n_samples,
                seed: quad.seed,
                type_pair: Some(TypePair(class(*t1), class(*t2))),
            };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{taylor_coeffs, Model, Scaled};
    use crate::kacrice::{asymptotic_constants, Sequential};
    use crate::types::TypeClass;

    #[test]
    fn line_integral_matches_brute_force() {
        let z = [0.3, -0.2, 0.5, 0.1, 0.4, -0.7];
        let m = [0.6, 0.1, -0.4, 0.2, -0.3, 0.5];
        let exact = line_integrals(&z, &m);
        let mut brute = [0.0; 9];
        let h = 1e-4;
        let mut t = -12.0;
        while t < 12.0 {
            let tm = t + 0.5 * h;
            let zeta: [f64; 6] = core::array::from_fn(|i| z[i] + tm * m[i]);
            let v = typed_point(&zeta);
            for k in 0..9 {
                brute[k] += v[k] * normal::pdf(tm) * h;
            }
            t += h;
        }
        for k in 0..9 {
            assert!((exact[k] - brute[k]).abs() < 1e-7, "{k}: {} vs {}", exact[k], brute[k]);
        }
    }

    #[test]
    fn methods_agree() {
        let m = Model::BargmannFock;
        let mut vals = [0.0; 3];
        let mut errs = [0.0; 3];
        for (i, method) in [Method::PlainMc, Method::RandomizedQmc, Method::LineConditional].into_iter().enumerate() {
            let e = k2(&m, 0.3, &SphereQuadrature::new(200_000, 9).with_method(method)).unwrap();
            vals[i] = e.value;
            errs[i] = e.std_error;
        }
        for i in 1..3 {
            let s = (errs[0] * errs[0] + errs[i] * errs[i]).sqrt();
            assert!((vals[i] - vals[0]).abs() < 4.0 * s, "{vals:?} {errs:?}");
        }
        assert!(errs[2] < errs[0]);
    }

    #[test]
    fn small_r_limit_is_twice_the_closed_form_constant() {
        let m = Model::BargmannFock;
        let c = asymptotic_constants(&taylor_coeffs(&m).unwrap()).unwrap();
        let e = k2(&m, 0.01, &SphereQuadrature::new(400_000, 1).with_method(Method::LineConditional)).unwrap();
        assert!((e.value - c.k2_limit).abs() < 4.0 * e.std_error + 1e-3 * c.k2_limit, "{e:?} vs {}", c.k2_limit);
    }

    #[test]
    fn typed_table_partitions_the_total() {
        let m = Model::RandomWave;
        let q = SphereQuadrature::new(100_000, 4).with_method(Method::LineConditional);
        let total = k2(&m, 0.2, &q).unwrap();
        let table = typed_k2_table_with(&m, 0.2, &q, &Sequential).unwrap();
        let sum: f64 = table.iter().flatten().map(|e| e.value).sum();
        assert!((sum - total.value).abs() < 1e-12 * total.value);
        let ext = typed_k2(&m, 0.2, TypePair(TypeClass::Extremum, TypeClass::Extremum), &q).unwrap();
        let parts = table[0][0].value + table[1][1].value + table[0][1].value + table[1][0].value;
        assert!((ext.value - parts).abs() < 1e-12 * ext.value.max(1e-300));
    }

    #[test]
    fn rescaled_kernel_obeys_the_fourth_power_law() {
        // C(r) = exp(-r^2/2) normalizes with s = sqrt2; K2 in original units is K2_norm(r/s)/s^4
        let wide = Scaled::new(Model::BargmannFock, core::f64::consts::FRAC_1_SQRT_2);
        let normalized = crate::covariance::normalize(wide).unwrap();
        let s = normalized.length_scale();
        let q = SphereQuadrature::new(20_000, 5);
        let r = 0.4;
        let a = k2(&normalized, r / s, &q).unwrap().value / s.powi(4);
        let b = k2(&Model::BargmannFock, r / s, &q).unwrap().value / s.powi(4);
        assert!((a - b).abs() <= 1e-8 * b);
    }

    #[test]
    fn tolerance_is_enforced() {
        let q = SphereQuadrature::new(1000, 1).with_tolerance(1e-6);
        assert!(matches!(k2(&Model::RandomWave, 0.2, &q), Err(Error::QuadratureUnderResolved { .. })));
    }
}

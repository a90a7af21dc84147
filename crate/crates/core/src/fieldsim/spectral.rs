//! Spectral synthesis of isotropic Gaussian fields on the flat torus `[0, L)^2`.
//!
//! A sample is the finite trigonometric sum
//! `F(x) = sum_m sqrt(w_m) (xi_m cos(k_m . x) + eta_m sin(k_m . x))`
//! over torus wavevectors `k_m = 2 pi n_m / L` in a half plane, so its covariance is
//! `sum_m w_m cos(k_m . d)` and all derivatives are exact.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::covariance::Model;
use crate::{Error, Result};

/// Largest spectral mass a sampler may discard.
pub const MAX_TRUNCATED_MASS: f64 = 1e-3;

/// Default number of half-plane modes.
pub const DEFAULT_MODE_BUDGET: usize = 2048;

/// Configuration of the spectral sampler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSampler {
    pub model: Model,
    /// Side `L` of the torus.
    pub side: f64,
    pub mode_budget: usize,
    pub seed: u64,
    /// Samples `C(scale * r)` instead of `C(r)`.
    pub scale: f64,
}

/// One wavevector of the synthesis with its spectral weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub n: [i32; 2],
    pub k: [f64; 2],
    pub weight: f64,
}

/// The discretized spectral measure shared by all samples of a sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    pub side: f64,
    pub modes: Vec<Mode>,
    /// Fraction of the spectral mass left out by the mode budget.
    pub truncated_mass: f64,
}

impl SpectralSampler {
    pub fn new(model: Model, side: f64, seed: u64) -> Self {
        SpectralSampler { model, side, mode_budget: DEFAULT_MODE_BUDGET, seed, scale: 1.0 }
    }

    pub fn with_mode_budget(mut self, budget: usize) -> Self {
        self.mode_budget = budget;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn measure(&self) -> Result<SpectralMeasure> {
        spectral_measure(&self.model, self.side, self.scale, self.mode_budget)
    }

    /// Sample number `index`; stream `index` of the sampler's seed.
    pub fn sample(&self, measure: &SpectralMeasure, index: u64) -> TorusField {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        TorusField::draw(measure, &mut rng)
    }
}

/// Root mean square wavenumber, `sqrt(-Laplacian C(0))`.
pub fn rms_wavenumber(measure: &SpectralMeasure) -> f64 {
    measure.modes.iter().map(|m| m.weight * (m.k[0] * m.k[0] + m.k[1] * m.k[1])).sum::<f64>().sqrt()
}

fn in_half_plane(n: [i32; 2]) -> bool {
    n[1] > 0 || (n[1] == 0 && n[0] >= 0)
}

/// Unnormalized spectral weights on the half-plane lattice (the origin once, every other
/// point carrying the mass of `k` and `-k`).
fn lattice_weights(model: &Model, side: f64, scale: f64) -> Result<Vec<Mode>> {
    let dk = 2.0 * PI / side;
    let mut acc: BTreeMap<[i32; 2], f64> = BTreeMap::new();
    let mut add = |n: [i32; 2], w: f64| {
        if w > 0.0 && in_half_plane(n) {
            *acc.entry(n).or_insert(0.0) += if n == [0, 0] { w } else { 2.0 * w };
        }
    };
    let (ring, gauss) = match *model {
        Model::RandomWave => (1.0, 0.0),
        Model::BargmannFock => (0.0, 1.0),
        Model::Mixture { weight } => (weight, 1.0 - weight),
        Model::Polynomial { .. } => {
            return Err(Error::NoSpectralMeasure(alloc::format!("{model}")));
        }
    };
    if gauss > 0.0 {
        // exp(-r^2 s^2) has spectral density exp(-|k|^2 / (4 s^2)) / (4 pi s^2)
        let kmax = 2.0 * scale * 7.0;
        let nmax = (kmax / dk).ceil() as i32;
        let mut pts = Vec::new();
        let mut total = 0.0;
        for n2 in 0..=nmax {
            for n1 in -nmax..=nmax {
                let k2 = ((n1 * n1 + n2 * n2) as f64) * dk * dk;
                if k2 > kmax * kmax {
                    continue;
                }
                let rho = (-k2 / (4.0 * scale * scale)).exp();
                if in_half_plane([n1, n2]) {
                    total += if n1 == 0 && n2 == 0 { rho } else { 2.0 * rho };
                    pts.push(([n1, n2], rho));
                }
            }
        }
        for (n, rho) in pts {
            add(n, gauss * rho / total);
        }
    }
    if ring > 0.0 {
        let radius = 2.0 * scale;
        let nmax = ((radius + dk) / dk).ceil() as i32;
        let mut pts = Vec::new();
        for n2 in 0..=nmax {
            for n1 in -nmax..=nmax {
                let k = ((n1 * n1 + n2 * n2) as f64).sqrt() * dk;
                if (k - radius).abs() <= 0.5 * dk && in_half_plane([n1, n2]) && (n1, n2) != (0, 0) {
                    pts.push([n1, n2]);
                }
            }
        }
        if pts.is_empty() {
            return Err(Error::InvalidModel(alloc::format!("no torus wavevector near |k| = {radius} for side {side}")));
        }
        let w = ring / (2.0 * pts.len() as f64);
        for n in pts {
            add(n, w);
        }
    }
    Ok(acc.into_iter().map(|(n, weight)| Mode { n, k: [n[0] as f64 * dk, n[1] as f64 * dk], weight }).collect())
}

/// Discretizes the spectral measure of `C(scale * r)` on the torus of side `side`,
/// keeping the `budget` heaviest half-plane modes and renormalizing to unit variance.
pub fn spectral_measure(model: &Model, side: f64, scale: f64, budget: usize) -> Result<SpectralMeasure> {
    if !(side > 0.0) || !side.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("torus side must be positive, got {side}")));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidArgument(alloc::format!("scale must be positive, got {scale}")));
    }
    let mut modes = lattice_weights(model, side, scale)?;
    modes.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.n.cmp(&b.n)));
    let total: f64 = modes.iter().map(|m| m.weight).sum();
    let dropped = modes.iter().skip(budget).fold(0.0, |a, m| a + m.weight);
    let truncated_mass = dropped / total;
    if truncated_mass > MAX_TRUNCATED_MASS {
        return Err(Error::ModeBudgetTooSmall { mass: truncated_mass, limit: MAX_TRUNCATED_MASS });
    }
    modes.truncate(budget);
    let kept: f64 = modes.iter().map(|m| m.weight).sum();
    for m in &mut modes {
        m.weight /= kept;
    }
    modes.sort_by(|a, b| a.n[1].cmp(&b.n[1]).then(a.n[0].cmp(&b.n[0])));
    Ok(SpectralMeasure { side, modes, truncated_mass })
}

impl SpectralMeasure {
    /// Covariance of the synthesized field at lag `d`.
    pub fn covariance(&self, d: [f64; 2]) -> f64 {
        self.modes.iter().map(|m| m.weight * (m.k[0] * d[0] + m.k[1] * d[1]).cos()).sum()
    }
}

/// Value, gradient and Hessian at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: [f64; 2],
    /// `[h11, h12, h22]`.
    pub hessian: [f64; 3],
}

/// One sampled field: complex coefficients `c_m = sqrt(w_m) (xi_m - i eta_m)` so that
/// `F(x) = Re sum_m c_m exp(i k_m . x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    pub side: f64,
    n: Vec<[i32; 2]>,
    k: Vec<[f64; 2]>,
    c: Vec<(f64, f64)>,
    n1_max: i32,
    n2_max: i32,
}

impl TorusField {
    pub fn draw<R: rand::Rng + ?Sized>(measure: &SpectralMeasure, rng: &mut R) -> Self {
        let mut c = Vec::with_capacity(measure.modes.len());
        for m in &measure.modes {
            let a = m.weight.sqrt();
            let xi: f64 = StandardNormal.sample(rng);
            let eta: f64 = StandardNormal.sample(rng);
            c.push(if m.n == [0, 0] { (a * xi, 0.0) } else { (a * xi, -a * eta) });
        }
        Self::from_parts(measure, c)
    }

    /// A field with prescribed coefficients `(re, im)` on the measure's modes.
    pub fn from_parts(measure: &SpectralMeasure, c: Vec<(f64, f64)>) -> Self {
        let n: Vec<[i32; 2]> = measure.modes.iter().map(|m| m.n).collect();
        let n1_max = n.iter().map(|v| v[0].abs()).max().unwrap_or(0);
        let n2_max = n.iter().map(|v| v[1]).max().unwrap_or(0);
        TorusField { side: measure.side, k: measure.modes.iter().map(|m| m.k).collect(), n, c, n1_max, n2_max }
    }

    /// `cos x1 + cos x2` on the torus of side `2 pi`.
    pub fn two_cosines() -> Self {
        let measure = SpectralMeasure {
            side: 2.0 * PI,
            modes: alloc::vec![Mode { n: [1, 0], k: [1.0, 0.0], weight: 0.5 }, Mode { n: [0, 1], k: [0.0, 1.0], weight: 0.5 }],
            truncated_mass: 0.0,
        };
        Self::from_parts(&measure, alloc::vec![(1.0, 0.0), (1.0, 0.0)])
    }

    pub fn n_modes(&self) -> usize {
        self.c.len()
    }

    fn phases(&self, x: f64, max: i32) -> Vec<(f64, f64)> {
        let t = 2.0 * PI * x / self.side;
        (0..=max).map(|j| ((j as f64 * t).cos(), (j as f64 * t).sin())).collect()
    }

    pub fn jet(&self, x: [f64; 2]) -> Jet {
        let e1 = self.phases(x[0], self.n1_max);
        let e2 = self.phases(x[1], self.n2_max);
        let mut j = Jet { value: 0.0, gradient: [0.0; 2], hessian: [0.0; 3] };
        for ((n, k), &(cr, ci)) in self.n.iter().zip(&self.k).zip(&self.c) {
            let (a, b) = e1[n[0].unsigned_abs() as usize];
            let b = if n[0] < 0 { -b } else { b };
            let (p, q) = e2[n[1] as usize];
            // exp(i k.x) = (a + ib)(p + iq)
            let (er, ei) = (a * p - b * q, a * q + b * p);
            let re = cr * er - ci * ei;
            let im = cr * ei + ci * er;
            j.value += re;
            j.gradient[0] -= im * k[0];
            j.gradient[1] -= im * k[1];
            j.hessian[0] -= re * k[0] * k[0];
            j.hessian[1] -= re * k[0] * k[1];
            j.hessian[2] -= re * k[1] * k[1];
        }
        j
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.jet(x).value
    }

    /// Gradient on the `cells x cells` grid `x_ij = (i, j) L / cells`, as two row-major arrays.
    pub fn gradient_grid(&self, cells: usize) -> [Vec<f64>; 2] {
        let t = 2.0 * PI / cells as f64;
        let rows = (self.n2_max + 1) as usize;
        // g[d][i * rows + n2] = sum over modes with this n2 of c * (i k_d) * exp(i n1 t_i)
        let mut g = [alloc::vec![(0.0f64, 0.0f64); cells * rows], alloc::vec![(0.0f64, 0.0f64); cells * rows]];
        for ((n, k), &(cr, ci)) in self.n.iter().zip(&self.k).zip(&self.c) {
            for i in 0..cells {
                let ph = ((n[0] as i64 * i as i64).rem_euclid(cells as i64)) as f64 * t;
                let (s, c) = ph.sin_cos();
                let (er, ei) = (cr * c - ci * s, cr * s + ci * c);
                for d in 0..2 {
                    // multiply by i k_d
                    let slot = &mut g[d][i * rows + n[1] as usize];
                    slot.0 -= ei * k[d];
                    slot.1 += er * k[d];
                }
            }
        }
        let e2: Vec<(f64, f64)> = (0..cells * rows)
            .map(|idx| {
                let (j, n2) = (idx / rows, idx % rows);
                let ph = ((n2 * j) % cells) as f64 * t;
                let (s, c) = ph.sin_cos();
                (c, s)
            })
            .collect();
        let mut out = [alloc::vec![0.0; cells * cells], alloc::vec![0.0; cells * cells]];
        for d in 0..2 {
            for i in 0..cells {
                let gi = &g[d][i * rows..(i + 1) * rows];
                for j in 0..cells {
                    let ej = &e2[j * rows..(j + 1) * rows];
                    out[d][i * cells + j] = gi.iter().zip(ej).map(|(a, e)| a.0 * e.0 - a.1 * e.1).sum();
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_normalized_and_budget_enforced() {
        let m = spectral_measure(&Model::BargmannFock, 30.0, 1.0, 4096).unwrap();
        assert!((m.modes.iter().map(|m| m.weight).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.truncated_mass < 1e-6);
        assert!(matches!(spectral_measure(&Model::BargmannFock, 30.0, 1.0, 50), Err(Error::ModeBudgetTooSmall { .. })));
        assert!(matches!(spectral_measure(&Model::Polynomial { g4: 0.25, g6: 1.0 / 36.0, g8: 1.0 / 576.0 }, 30.0, 1.0, 50), Err(Error::NoSpectralMeasure(_))));
    }

    #[test]
    fn discretized_covariance_matches_kernels() {
        let m = spectral_measure(&Model::BargmannFock, 30.0, 1.0, 4096).unwrap();
        assert!((m.covariance([0.5, 0.0]) - (-0.25f64).exp()).abs() < 1e-6);
        assert!((m.covariance([0.3, 0.4]) - (-0.25f64).exp()).abs() < 1e-6);
        let m = spectral_measure(&Model::RandomWave, 30.0, 1.0, 4096).unwrap();
        // monochromatic discretization: only approximately isotropic
        assert!((m.covariance([1.0, 0.0]) - 0.223_890_779_141_235_67).abs() < 0.05);
        assert!((rms_wavenumber(&m) - 2.0).abs() < 0.02);
    }

    #[test]
    fn grid_gradient_matches_pointwise_jet() {
        let s = SpectralSampler::new(Model::BargmannFock, 12.0, 5);
        let m = s.measure().unwrap();
        let f = s.sample(&m, 0);
        let cells = 40;
        let g = f.gradient_grid(cells);
        for (i, j) in [(0, 0), (3, 17), (39, 1), (22, 22)] {
            let x = [i as f64 * 12.0 / cells as f64, j as f64 * 12.0 / cells as f64];
            let jet = f.jet(x);
            assert!((g[0][i * cells + j] - jet.gradient[0]).abs() < 1e-10);
            assert!((g[1][i * cells + j] - jet.gradient[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        let s = SpectralSampler::new(Model::mixture(0.5), 15.0, 9);
        let f = s.sample(&s.measure().unwrap(), 3);
        let x = [1.3, 7.1];
        let h = 1e-5;
        let j = f.jet(x);
        let jx = f.jet([x[0] + h, x[1]]);
        let jy = f.jet([x[0], x[1] + h]);
        let jxm = f.jet([x[0] - h, x[1]]);
        let jym = f.jet([x[0], x[1] - h]);
        assert!(((jx.value - jxm.value) / (2.0 * h) - j.gradient[0]).abs() < 1e-7);
        assert!(((jy.value - jym.value) / (2.0 * h) - j.gradient[1]).abs() < 1e-7);
        assert!(((jx.gradient[0] - jxm.gradient[0]) / (2.0 * h) - j.hessian[0]).abs() < 1e-6);
        assert!(((jy.gradient[0] - jym.gradient[0]) / (2.0 * h) - j.hessian[1]).abs() < 1e-6);
        assert!(((jy.gradient[1] - jym.gradient[1]) / (2.0 * h) - j.hessian[2]).abs() < 1e-6);
    }

    #[test]
    fn field_is_periodic() {
        let s = SpectralSampler::new(Model::RandomWave, 10.0, 1);
        let f = s.sample(&s.measure().unwrap(), 0);
        assert!((f.value([0.3, 0.2]) - f.value([10.3, -9.8])).abs() < 1e-12);
    }
}

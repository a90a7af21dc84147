//! Batched Monte Carlo over the standard Gaussian in six dimensions and over `S^5`.
//!
//! Batch `b` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, so every
//! batch is reproducible on its own and results do not depend on how batches are
//! scheduled. Batch results are always reduced in batch order.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::normal;

/// Surface area of the unit sphere `S^5` in `R^6`.
pub const SPHERE_AREA: f64 = PI * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    /// Independent Gaussian draws.
    #[default]
    PlainMc,
    /// Halton points with a Cranley-Patterson shift per batch, mapped through the
    /// normal quantile.
    RandomizedQmc,
    /// Plain draws with one coordinate integrated in closed form along a line
    /// (used by the Kac-Rice estimators; generic integrands fall back to plain draws).
    LineConditional,
}

impl core::str::FromStr for Method {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mc" | "plain" | "plain-mc" => Ok(Method::PlainMc),
            "qmc" | "rqmc" | "randomized-qmc" => Ok(Method::RandomizedQmc),
            "line" | "line-conditional" => Ok(Method::LineConditional),
            _ => Err(crate::Error::InvalidArgument(alloc::format!("unknown quadrature method {s:?} (mc, qmc, line)"))),
        }
    }
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Method::PlainMc => "mc",
            Method::RandomizedQmc => "qmc",
            Method::LineConditional => "line",
        })
    }
}

/// Quadrature configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereQuadrature {
    pub n_samples: u64,
    pub seed: u64,
    /// Number of independent batches; the standard error comes from their spread.
    pub batches: usize,
    pub method: Method,
    /// Maximum accepted relative standard error.
    pub tolerance: Option<f64>,
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        SphereQuadrature { n_samples: 1_000_000, seed: 0, batches: 32, method: Method::PlainMc, tolerance: None }
    }
}

impl SphereQuadrature {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        SphereQuadrature { n_samples, seed, ..Default::default() }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_batches(mut self, batches: usize) -> Self {
        self.batches = batches;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self
    }

    fn batch_count(&self) -> usize {
        self.batches.max(2)
    }

    fn batch_size(&self, b: usize) -> u64 {
        let nb = self.batch_count() as u64;
        self.n_samples / nb + u64::from((b as u64) < self.n_samples % nb)
    }

    /// Standard normal 6-vectors for batch `b`.
    pub fn batch_points(&self, b: usize) -> BatchPoints {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(b as u64);
        let shift = core::array::from_fn(|_| rng.random::<f64>());
        BatchPoints { rng, qmc: self.method == Method::RandomizedQmc, index: 0, shift, remaining: self.batch_size(b) }
    }

    /// Mean of `f` over standard normal vectors, with `K` integrands evaluated on
    /// the same points.
    pub fn gaussian_means<const K: usize, R, F>(&self, runner: &R, f: F) -> [QuadEstimate; K]
    where
        R: BatchRunner + ?Sized,
        F: Fn(&[f64; 6]) -> [f64; K] + Sync,
    {
        let batches = self.batch_count();
        let sums: Vec<([f64; K], u64)> = runner.run(batches, &|b| {
            let mut acc = [0.0; K];
            let mut n = 0u64;
            for xi in self.batch_points(b) {
                let v = f(&xi);
                for k in 0..K {
                    acc[k] += v[k];
                }
                n += 1;
            }
            (acc, n)
        });
        core::array::from_fn(|k| QuadEstimate::from_batches(sums.iter().map(|(s, n)| (s[k], *n))))
    }

    /// Mean of a scalar `f` over standard normal vectors.
    pub fn gaussian_mean<R, F>(&self, runner: &R, f: F) -> QuadEstimate
    where
        R: BatchRunner + ?Sized,
        F: Fn(&[f64; 6]) -> f64 + Sync,
    {
        let [e] = self.gaussian_means(runner, |x| [f(x)]);
        e
    }

    /// `int_{S^5} f(s) ds`.
    pub fn integrate<R, F>(&self, runner: &R, f: F) -> QuadEstimate
    where
        R: BatchRunner + ?Sized,
        F: Fn(&[f64; 6]) -> f64 + Sync,
    {
        self.gaussian_mean(runner, |xi| f(&to_sphere(xi))).scaled(SPHERE_AREA)
    }
}

/// Projects a nonzero vector onto the unit sphere.
pub fn to_sphere(xi: &[f64; 6]) -> [f64; 6] {
    let n = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    core::array::from_fn(|i| xi[i] / n)
}

/// Iterator over the Gaussian points of one batch.
pub struct BatchPoints {
    rng: ChaCha8Rng,
    qmc: bool,
    index: u64,
    shift: [f64; 6],
    remaining: u64,
}

const HALTON_BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut x, mut f) = (0.0, inv);
    while n > 0 {
        x += (n % base) as f64 * f;
        n /= base;
        f *= inv;
    }
    x
}

impl Iterator for BatchPoints {
    type Item = [f64; 6];

    fn next(&mut self) -> Option<[f64; 6]> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.index += 1;
        if self.qmc {
            let i = self.index;
            Some(core::array::from_fn(|d| {
                let u = (radical_inverse(i, HALTON_BASES[d]) + self.shift[d]).fract();
                normal::quantile(u.max(f64::MIN_POSITIVE))
            }))
        } else {
            let rng = &mut self.rng;
            Some(core::array::from_fn(|_| rng.sample(StandardNormal)))
        }
    }
}

/// Executes independent batch jobs. Implementations may run them in any order or
/// in parallel but must return results indexed by batch.
pub trait BatchRunner: Sync {
    fn run<T: Send>(&self, batches: usize, job: &(dyn Fn(usize) -> T + Sync)) -> Vec<T>;
}

/// Runs batches one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl BatchRunner for Sequential {
    fn run<T: Send>(&self, batches: usize, job: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        (0..batches).map(job).collect()
    }
}

/// A Monte Carlo mean with its batch-based standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl QuadEstimate {
    /// Combines per-batch `(sum, count)` pairs; the error is the spread of batch means.
    pub fn from_batches(batches: impl Iterator<Item = (f64, u64)>) -> Self {
        let mut total = 0.0;
        let mut n = 0u64;
        let mut means = Vec::new();
        for (s, c) in batches {
            total += s;
            n += c;
            if c > 0 {
                means.push(s / c as f64);
            }
        }
        let value = if n > 0 { total / n as f64 } else { 0.0 };
        let k = means.len();
        let std_error = if k > 1 {
            let mu = means.iter().sum::<f64>() / k as f64;
            let var = means.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            f64::INFINITY
        };
        QuadEstimate { value, std_error, n_samples: n }
    }

    pub fn scaled(self, factor: f64) -> Self {
        QuadEstimate { value: self.value * factor, std_error: self.std_error * factor.abs(), ..self }
    }

    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.std_error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.std_error / self.value.abs()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand_gives_sphere_area() {
        for method in [Method::PlainMc, Method::RandomizedQmc] {
            let q = SphereQuadrature::new(10_000, 3).with_method(method);
            let e = q.integrate(&Sequential, |_| 1.0);
            assert!((e.value - 31.00627668029982).abs() < 1e-12);
            assert_eq!(e.n_samples, 10_000);
        }
    }

    #[test]
    fn second_moment_on_sphere() {
        // E[s_1^2] = 1/6 and E[s_1^2 s_2^2] = 1/48 under the uniform law on S^5
        for method in [Method::PlainMc, Method::RandomizedQmc] {
            let q = SphereQuadrature::new(200_000, 11).with_method(method);
            let e = q.integrate(&Sequential, |s| s[0] * s[0]).scaled(1.0 / SPHERE_AREA);
            assert!((e.value - 1.0 / 6.0).abs() < 4.0 * e.std_error, "{method}: {e:?}");
            let e = q.integrate(&Sequential, |s| s[0] * s[0] * s[1] * s[1]).scaled(1.0 / SPHERE_AREA);
            assert!((e.value - 1.0 / 48.0).abs() < 4.0 * e.std_error, "{method}: {e:?}");
        }
    }

    #[test]
    fn qmc_beats_plain_on_smooth_integrand() {
        let f = |x: &[f64; 6]| (0.3 * x[0] + 0.2 * x[3]).cos();
        let plain = SphereQuadrature::new(100_000, 5).gaussian_mean(&Sequential, f);
        let qmc = SphereQuadrature::new(100_000, 5).with_method(Method::RandomizedQmc).gaussian_mean(&Sequential, f);
        let exact = (-0.5 * 0.13f64).exp();
        assert!((plain.value - exact).abs() < 4.0 * plain.std_error);
        assert!((qmc.value - exact).abs() < 4.0 * qmc.std_error.max(1e-12));
        assert!(qmc.std_error < plain.std_error);
    }

    #[test]
    fn batches_are_reproducible_and_distinct() {
        let q = SphereQuadrature::new(100, 42);
        let a: Vec<_> = q.batch_points(3).collect();
        let b: Vec<_> = q.batch_points(3).collect();
        let c: Vec<_> = q.batch_points(4).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let sizes: u64 = (0..q.batches).map(|b| q.batch_points(b).count() as u64).sum();
        assert_eq!(sizes, 100);
    }
}

//! Radial covariance kernels.

use alloc::string::{String, ToString};
use alloc::format;
use num_traits::Float;

use super::finite_diff;

/// Highest Taylor index `k` (coefficient of `r^{2k}`) any consumer asks for.
pub const MAX_TAYLOR_INDEX: usize = 8;

/// A radial covariance `C(r)` of an isotropic planar field.
///
/// Implementors must be even in `r`; negative arguments are evaluated as `|r|`.
pub trait RadialKernel: Send + Sync {
    fn name(&self) -> String;

    fn eval(&self, r: f64) -> f64;

    /// `order`-th radial derivative. The default is a Richardson-extrapolated
    /// central difference of [`eval`](Self::eval).
    fn deriv(&self, r: f64, order: usize) -> f64 {
        finite_diff::derivative(&|x| self.eval(x), r, order).value
    }

    /// Coefficient `c_k` of `r^{2k}` in the Maclaurin series, when known in closed form.
    fn even_taylor(&self, _k: usize) -> Option<f64> {
        None
    }

    /// Spatial rescaling applied so far (1 for a freshly built kernel).
    fn length_scale(&self) -> f64 {
        1.0
    }
}

impl<K: RadialKernel + ?Sized> RadialKernel for &K {
    fn name(&self) -> String {
        (**self).name()
    }
    fn eval(&self, r: f64) -> f64 {
        (**self).eval(r)
    }
    fn deriv(&self, r: f64, order: usize) -> f64 {
        (**self).deriv(r, order)
    }
    fn even_taylor(&self, k: usize) -> Option<f64> {
        (**self).even_taylor(k)
    }
    fn length_scale(&self) -> f64 {
        (**self).length_scale()
    }
}

impl<K: RadialKernel + ?Sized> RadialKernel for alloc::boxed::Box<K> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn eval(&self, r: f64) -> f64 {
        (**self).eval(r)
    }
    fn deriv(&self, r: f64, order: usize) -> f64 {
        (**self).deriv(r, order)
    }
    fn even_taylor(&self, k: usize) -> Option<f64> {
        (**self).even_taylor(k)
    }
    fn length_scale(&self) -> f64 {
        (**self).length_scale()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Bessel function of the first kind for any integer order.
fn bessel_j(n: i32, x: f64) -> f64 {
    match n {
        0 => libm::j0(x),
        1 => libm::j1(x),
        -1 => -libm::j1(x),
        _ => libm::jn(n, x),
    }
}

/// `d^k/dr^k J0(2r)` from `J0' = -J1` and `2 Jn' = J(n-1) - J(n+1)`.
fn rwm_deriv(r: f64, k: usize) -> f64 {
    let x = 2.0 * r;
    let mut acc = 0.0;
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(k, j) * bessel_j(2 * j as i32 - k as i32, x);
    }
    acc
}

/// `d^k/dr^k exp(-r^2) = (-1)^k H_k(r) exp(-r^2)` with physicists' Hermite polynomials.
fn bf_deriv(r: f64, k: usize) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * r);
    let hk = match k {
        0 => h0,
        _ => {
            for n in 1..k {
                let h2 = 2.0 * r * h1 - 2.0 * n as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    };
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * hk * (-r * r).exp()
}

fn rwm_taylor(k: usize) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign / (factorial(k) * factorial(k))
}

fn bf_taylor(k: usize) -> f64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign / factorial(k)
}

/// Built-in covariance models, all normalized to `g2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Random wave model, `C(r) = J0(2r)`.
    RandomWave,
    /// Bargmann-Fock, `C(r) = exp(-r^2)`.
    BargmannFock,
    /// `w J0(2r) + (1 - w) exp(-r^2)`.
    Mixture { weight: f64 },
    /// `1 - r^2 + g4 r^4 - g6 r^6 + g8 r^8`. Only meaningful near the origin.
    Polynomial { g4: f64, g6: f64, g8: f64 },
}

impl Model {
    pub fn mixture(weight: f64) -> Self {
        Model::Mixture { weight }
    }

    /// The three kernels with a spectral representation and a valid covariance at all `r`.
    pub fn catalog() -> [Model; 3] {
        [Model::RandomWave, Model::BargmannFock, Model::Mixture { weight: 0.5 }]
    }

    pub fn has_series_only(&self) -> bool {
        matches!(self, Model::Polynomial { .. })
    }

    fn poly_coeffs(g4: f64, g6: f64, g8: f64) -> [f64; 5] {
        [1.0, -1.0, g4, -g6, g8]
    }
}

impl RadialKernel for Model {
    fn name(&self) -> String {
        self.to_string()
    }

    fn eval(&self, r: f64) -> f64 {
        self.deriv(r, 0)
    }

    fn deriv(&self, r: f64, order: usize) -> f64 {
        match *self {
            Model::RandomWave => rwm_deriv(r, order),
            Model::BargmannFock => bf_deriv(r, order),
            Model::Mixture { weight } => weight * rwm_deriv(r, order) + (1.0 - weight) * bf_deriv(r, order),
            Model::Polynomial { g4, g6, g8 } => {
                let c = Self::poly_coeffs(g4, g6, g8);
                let mut acc = 0.0;
                for (k, ck) in c.iter().enumerate() {
                    let p = 2 * k;
                    if p < order {
                        continue;
                    }
                    let falling = (0..order).fold(1.0, |a, i| a * (p - i) as f64);
                    acc += ck * falling * r.powi((p - order) as i32);
                }
                acc
            }
        }
    }

    fn even_taylor(&self, k: usize) -> Option<f64> {
        Some(match *self {
            Model::RandomWave => rwm_taylor(k),
            Model::BargmannFock => bf_taylor(k),
            Model::Mixture { weight } => weight * rwm_taylor(k) + (1.0 - weight) * bf_taylor(k),
            Model::Polynomial { g4, g6, g8 } => Self::poly_coeffs(g4, g6, g8).get(k).copied().unwrap_or(0.0),
        })
    }
}

impl core::fmt::Display for Model {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Model::RandomWave => write!(f, "rwm"),
            Model::BargmannFock => write!(f, "bf"),
            Model::Mixture { weight } => write!(f, "mix:{weight}"),
            Model::Polynomial { g4, g6, g8 } => write!(f, "poly:{g4},{g6},{g8}"),
        }
    }
}

impl core::str::FromStr for Model {
    type Err = crate::Error;

    /// Grammar: `rwm`, `bf`, `mix:<w>` with `w` in `[0, 1]`, `poly:g4,g6,g8`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |msg: &str| crate::Error::InvalidModel(format!("{s}: {msg}"));
        match s {
            "rwm" | "random_wave" => return Ok(Model::RandomWave),
            "bf" | "bargmann_fock" => return Ok(Model::BargmannFock),
            _ => {}
        }
        if let Some(w) = s.strip_prefix("mix:") {
            let weight: f64 = w.trim().parse().map_err(|_| bad("weight is not a number"))?;
            if !(0.0..=1.0).contains(&weight) {
                return Err(bad("weight must lie in [0, 1]"));
            }
            return Ok(Model::Mixture { weight });
        }
        if let Some(rest) = s.strip_prefix("poly:") {
            let mut vals = [0.0; 3];
            let mut n = 0;
            for part in rest.split(',') {
                if n == 3 {
                    return Err(bad("expected exactly three coefficients"));
                }
                vals[n] = part.trim().parse().map_err(|_| bad("coefficient is not a number"))?;
                if !vals[n].is_finite() {
                    return Err(bad("coefficient is not finite"));
                }
                n += 1;
            }
            if n != 3 {
                return Err(bad("expected exactly three coefficients"));
            }
            return Ok(Model::Polynomial { g4: vals[0], g6: vals[1], g8: vals[2] });
        }
        Err(bad("expected rwm, bf, mix:<w> or poly:g4,g6,g8"))
    }
}

/// `r -> C(factor * r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaled<K> {
    inner: K,
    factor: f64,
    record: f64,
}

impl<K: RadialKernel> Scaled<K> {
    /// A new kernel `C(factor * r)`; the length-scale record is inherited from `inner`.
    pub fn new(inner: K, factor: f64) -> Self {
        let record = inner.length_scale();
        Scaled { inner, factor, record }
    }

    /// Like [`new`](Self::new) but multiplies `factor` into the length-scale record.
    pub(crate) fn recorded(inner: K, factor: f64) -> Self {
        let record = inner.length_scale() * factor;
        Scaled { inner, factor, record }
    }

    pub fn inner(&self) -> &K {
        &self.inner
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl<K: RadialKernel> RadialKernel for Scaled<K> {
    fn name(&self) -> String {
        if self.factor == 1.0 {
            self.inner.name()
        } else {
            format!("{}@{}", self.inner.name(), self.factor)
        }
    }

    fn eval(&self, r: f64) -> f64 {
        self.inner.eval(self.factor * r)
    }

    fn deriv(&self, r: f64, order: usize) -> f64 {
        self.factor.powi(order as i32) * self.inner.deriv(self.factor * r, order)
    }

    fn even_taylor(&self, k: usize) -> Option<f64> {
        self.inner.even_taylor(k).map(|c| c * self.factor.powi(2 * k as i32))
    }

    fn length_scale(&self) -> f64 {
        self.record
    }
}

/// A kernel given only by its values; derivatives come from finite differences.
pub struct FnKernel<F> {
    name: String,
    f: F,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnKernel<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnKernel { name: name.into(), f }
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> RadialKernel for FnKernel<F> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn eval(&self, r: f64) -> f64 {
        (self.f)(r.abs())
    }
}

impl<F> core::fmt::Debug for FnKernel<F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnKernel").field("name", &self.name).finish_non_exhaustive()
    }
}

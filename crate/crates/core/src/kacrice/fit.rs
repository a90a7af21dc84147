//! Power-law fits on log-log scale.

use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub n_points: usize,
}

impl ExponentFit {
    /// Symmetric interval `slope +- z * std_error`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.slope - z * self.std_error, self.slope + z * self.std_error)
    }
}

/// Least-squares slope of `log value` against `log r` from `(r, value, std_error)`.
///
/// With all standard errors positive the points are weighted by `(value/std_error)^2`
/// and the slope error follows from those variances; otherwise the fit is
/// unweighted and the slope error comes from the residuals.
pub fn decay_exponent_fit(points: &[(f64, f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: points.len() });
    }
    for &(r, v, _) in points {
        if !(v > 0.0) || !(r > 0.0) {
            return Err(Error::NonPositiveValue { r, value: v });
        }
    }
    let weighted = points.iter().all(|&(_, _, e)| e > 0.0 && e.is_finite());
    let w = |p: &(f64, f64, f64)| if weighted { (p.1 / p.2).powi(2) } else { 1.0 };
    let sw: f64 = points.iter().map(w).sum();
    let mx = points.iter().map(|p| w(p) * p.0.ln()).sum::<f64>() / sw;
    let my = points.iter().map(|p| w(p) * p.1.ln()).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| w(p) * (p.0.ln() - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| w(p) * (p.0.ln() - mx) * (p.1.ln() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let std_error = if weighted {
        (1.0 / sxx).sqrt()
    } else {
        let rss: f64 = points.iter().map(|p| (p.1.ln() - intercept - slope * p.0.ln()).powi(2)).sum();
        (rss / (points.len() - 2) as f64 / sxx).sqrt()
    };
    Ok(ExponentFit { slope, std_error, intercept, n_points: points.len() })
}

/// `count` points from `start` to `stop`, evenly spaced in `log r` or in `r`.
pub fn grid(start: f64, stop: f64, count: usize, log: bool) -> alloc::vec::Vec<f64> {
    if count == 1 {
        return alloc::vec![start];
    }
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if log {
                (start.ln() + t * (stop.ln() - start.ln())).exp()
            } else {
                start + t * (stop - start)
            }
        })
        .collect()
}

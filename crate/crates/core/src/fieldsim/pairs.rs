//! Empirical pair correlation of point sets on the torus.
//!
//! For one sample with ordered pair count `n_b` in the annulus `[r_lo, r_hi)`,
//! `K2_hat = n_b / (area * pi (r_hi^2 - r_lo^2))`. Samples are averaged and the standard
//! error is their spread, so a Poisson process of intensity `lambda` gives `lambda^2`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::finder::torus_delta;
use crate::types::{PointType, TypePair};
use crate::{Error, Result};

/// Accumulated ordered pair counts over samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PairHistogram {
    pub edges: Vec<f64>,
    pub side: f64,
    pub pairs: Vec<u64>,
    pub n_samples: u64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

/// One bin of the estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairBin {
    pub r_lo: f64,
    pub r_hi: f64,
    pub k2_hat: f64,
    pub std_error: f64,
    pub n_pairs: u64,
}

impl PairHistogram {
    pub fn new(edges: Vec<f64>, side: f64) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) || !(edges[0] >= 0.0) {
            return Err(Error::InvalidArgument("bin edges must be nonnegative and strictly increasing".into()));
        }
        if edges[edges.len() - 1] > 0.5 * side {
            return Err(Error::InvalidArgument(alloc::format!("largest separation must not exceed half the torus side {side}")));
        }
        let nb = edges.len() - 1;
        Ok(PairHistogram { edges, side, pairs: alloc::vec![0; nb], n_samples: 0, sum: alloc::vec![0.0; nb], sum_sq: alloc::vec![0.0; nb] })
    }

    /// `count` equal bins on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, count: usize, side: f64) -> Result<Self> {
        let edges = (0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect();
        Self::new(edges, side)
    }

    pub fn n_bins(&self) -> usize {
        self.pairs.len()
    }

    fn annulus(&self, b: usize) -> f64 {
        PI * (self.edges[b + 1].powi(2) - self.edges[b].powi(2))
    }

    /// Adds one sample given its per-bin ordered pair counts.
    pub fn add_counts(&mut self, counts: &[u64]) {
        let area = self.side * self.side;
        for (b, &c) in counts.iter().enumerate() {
            let k = c as f64 / (area * self.annulus(b));
            self.pairs[b] += c;
            self.sum[b] += k;
            self.sum_sq[b] += k * k;
        }
        self.n_samples += 1;
    }

    /// Adds one sample of points, optionally restricted to an ordered type pair.
    pub fn add_sample(&mut self, points: &[([f64; 2], PointType)], typed: Option<TypePair>) {
        let counts = pair_counts(points, &self.edges, self.side, typed);
        self.add_counts(&counts);
    }

    pub fn merge(&mut self, other: &PairHistogram) {
        for b in 0..self.n_bins() {
            self.pairs[b] += other.pairs[b];
            self.sum[b] += other.sum[b];
            self.sum_sq[b] += other.sum_sq[b];
        }
        self.n_samples += other.n_samples;
    }

    pub fn bins(&self) -> Vec<PairBin> {
        let n = self.n_samples as f64;
        (0..self.n_bins())
            .map(|b| {
                let mean = if n > 0.0 { self.sum[b] / n } else { 0.0 };
                let var = if n > 1.0 { ((self.sum_sq[b] - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
                PairBin { r_lo: self.edges[b], r_hi: self.edges[b + 1], k2_hat: mean, std_error: (var / n).sqrt(), n_pairs: self.pairs[b] }
            })
            .collect()
    }

    /// Bins without a single pair.
    pub fn empty_bins(&self) -> Vec<usize> {
        (0..self.n_bins()).filter(|&b| self.pairs[b] == 0).collect()
    }
}

/// Ordered pair counts per bin (each unordered pair counted twice when unrestricted).
pub fn pair_counts(points: &[([f64; 2], PointType)], edges: &[f64], side: f64, typed: Option<TypePair>) -> Vec<u64> {
    let nb = edges.len() - 1;
    let rmax = edges[nb];
    let mut counts = alloc::vec![0u64; nb];
    let cells = ((side / rmax).floor() as usize).clamp(1, 1024);
    let h = side / cells as f64;
    let cell_of = |p: [f64; 2]| {
        let c = |u: f64| ((u / h) as usize).min(cells - 1);
        c(p[0]) * cells + c(p[1])
    };
    let mut heads = alloc::vec![Vec::new(); cells * cells];
    for (i, (p, _)) in points.iter().enumerate() {
        heads[cell_of(*p)].push(i);
    }
    let mut tally = |i: usize, j: usize| {
        if let Some(pair) = typed {
            if !pair.contains(points[i].1, points[j].1) {
                return;
            }
        }
        let d = torus_delta(points[i].0, points[j].0, side);
        let r = d[0].hypot(d[1]);
        if r < edges[0] || r >= rmax {
            return;
        }
        let b = edges.partition_point(|&e| e <= r) - 1;
        counts[b.min(nb - 1)] += 1;
    };
    if cells < 3 {
        for i in 0..points.len() {
            for j in 0..points.len() {
                if i != j {
                    tally(i, j);
                }
            }
        }
        return counts;
    }
    for (i, (p, _)) in points.iter().enumerate() {
        let (ci, cj) = ((cell_of(*p) / cells) as i64, (cell_of(*p) % cells) as i64);
        for di in -1..=1 {
            for dj in -1..=1 {
                let c = (ci + di).rem_euclid(cells as i64) as usize * cells + (cj + dj).rem_euclid(cells as i64) as usize;
                for &j in &heads[c] {
                    if j != i {
                        tally(i, j);
                    }
                }
            }
        }
    }
    counts
}

/// Homogeneous Poisson process of the given intensity on the torus; every point is
/// labelled a saddle.
pub fn poisson_points<R: Rng + ?Sized>(intensity: f64, side: f64, rng: &mut R) -> Vec<([f64; 2], PointType)> {
    let mean = intensity * side * side;
    let n = if mean > 0.0 { Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0) } else { 0 };
    (0..n).map(|_| ([rng.random::<f64>() * side, rng.random::<f64>() * side], PointType::Saddle)).collect()
}

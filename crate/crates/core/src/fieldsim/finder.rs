//! Critical points of a sampled torus field: sign-pattern screening on a grid,
//! Newton refinement from each candidate cell, subdivision where Newton fails.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_traits::Float;

use super::spectral::{Jet, TorusField};
use crate::types::{classify as classify_bc, PointType};
use crate::{Error, Result};

/// Smallest `|det H|` accepted by [`classify`].
pub const DEGENERATE_DET: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    /// Position in `[0, L)^2`.
    pub position: [f64; 2],
    pub kind: PointType,
    pub hessian_det: f64,
    pub hessian_trace: f64,
    pub gradient_residual: f64,
}

/// Type of a critical point from its Hessian.
pub fn classify(hessian: [f64; 3]) -> Result<PointType> {
    let det = hessian[0] * hessian[2] - hessian[1] * hessian[1];
    if !(det.abs() > DEGENERATE_DET) {
        return Err(Error::DegenerateHessian { det });
    }
    classify_bc(-(hessian[0] + hessian[2]), det).ok_or(Error::DegenerateHessian { det })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinderConfig {
    /// Grid cells per side.
    pub cells: usize,
    pub newton_tol: f64,
    /// Points closer than this (torus metric) are merged.
    pub dedup_radius: f64,
    /// Levels of 2x2 subdivision tried when Newton fails from a cell centre.
    pub max_depth: u32,
    pub max_iterations: u32,
}

impl FinderConfig {
    /// Cells of size at most `step` on a torus of side `side`.
    pub fn with_step(side: f64, step: f64) -> Self {
        FinderConfig {
            cells: (side / step).ceil().max(4.0) as usize,
            newton_tol: 1e-10,
            dedup_radius: 1e-6 * side,
            max_depth: 3,
            max_iterations: 60,
        }
    }

    /// Grid step of 0.12 over the field's rms wavenumber (0.06 for `g2 = 1`).
    pub fn for_field(side: f64, rms_wavenumber: f64) -> Self {
        Self::with_step(side, 0.12 / rms_wavenumber)
    }
}

/// Result of one search.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CriticalPoints {
    pub points: Vec<CriticalPoint>,
    /// Candidate cells from which no refinement converged. The sign test is
    /// conservative, so most of these hold no zero at all.
    pub newton_failures: usize,
    /// Converged points rejected as degenerate.
    pub degenerate: usize,
}

impl CriticalPoints {
    pub fn count(&self, kind: PointType) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }

    /// `#min + #max - #saddle`, zero on the torus when nothing is missed.
    pub fn euler_characteristic(&self) -> i64 {
        self.count(PointType::Min) as i64 + self.count(PointType::Max) as i64 - self.count(PointType::Saddle) as i64
    }
}

fn wrap(x: f64, side: f64) -> f64 {
    let y = x.rem_euclid(side);
    if y >= side {
        0.0
    } else {
        y
    }
}

/// Torus (minimum image) displacement `b - a`.
pub fn torus_delta(a: [f64; 2], b: [f64; 2], side: f64) -> [f64; 2] {
    let d = |u: f64| u - side * (u / side).round();
    [d(b[0] - a[0]), d(b[1] - a[1])]
}

fn norm(g: [f64; 2]) -> f64 {
    g[0].hypot(g[1])
}

/// Damped Newton iteration for `grad F = 0`, with steps capped at `max_step`.
fn newton(field: &TorusField, start: [f64; 2], max_step: f64, cfg: &FinderConfig) -> Option<([f64; 2], Jet)> {
    let mut x = start;
    let mut jet = field.jet(x);
    for _ in 0..cfg.max_iterations {
        let g = jet.gradient;
        if norm(g) <= cfg.newton_tol {
            return Some((x, jet));
        }
        let [a, b, c] = jet.hessian;
        let det = a * c - b * b;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let mut step = [-(c * g[0] - b * g[1]) / det, -(a * g[1] - b * g[0]) / det];
        let len = norm(step);
        if len > max_step {
            step = [step[0] * max_step / len, step[1] * max_step / len];
        }
        x = [x[0] + step[0], x[1] + step[1]];
        if norm(torus_delta(start, x, field.side)) > 4.0 * max_step {
            return None;
        }
        jet = field.jet(x);
    }
    (norm(jet.gradient) <= cfg.newton_tol).then_some((x, jet))
}

fn straddles(v: [f64; 4]) -> bool {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    lo <= 0.0 && hi >= 0.0
}

/// Gradient components at the four corners of a square cell both change sign.
fn admits_zero(corners: [[f64; 2]; 4]) -> bool {
    straddles(corners.map(|g| g[0])) && straddles(corners.map(|g| g[1]))
}

/// Refines one cell with lower-left corner `origin` and side `h`; returns whether any
/// refinement converged.
fn refine(field: &TorusField, origin: [f64; 2], h: f64, depth: u32, cfg: &FinderConfig, found: &mut Vec<([f64; 2], Jet)>) -> bool {
    let centre = [origin[0] + 0.5 * h, origin[1] + 0.5 * h];
    if let Some(hit) = newton(field, centre, h, cfg) {
        found.push(hit);
        return true;
    }
    if depth == 0 {
        return false;
    }
    let half = 0.5 * h;
    let g = |x: f64, y: f64| field.jet([x, y]).gradient;
    let mut grid = [[[0.0; 2]; 3]; 3];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = g(origin[0] + i as f64 * half, origin[1] + j as f64 * half);
        }
    }
    let mut any = false;
    for i in 0..2 {
        for j in 0..2 {
            if admits_zero([grid[i][j], grid[i + 1][j], grid[i][j + 1], grid[i + 1][j + 1]]) {
                let o = [origin[0] + i as f64 * half, origin[1] + j as f64 * half];
                any |= refine(field, o, half, depth - 1, cfg, found);
            }
        }
    }
    any
}

/// All critical points of `field` found from the configured grid.
pub fn find_critical_points(field: &TorusField, cfg: &FinderConfig) -> CriticalPoints {
    let n = cfg.cells;
    let side = field.side;
    let h = side / n as f64;
    let [gx, gy] = field.gradient_grid(n);
    let at = |i: usize, j: usize| {
        let idx = (i % n) * n + (j % n);
        [gx[idx], gy[idx]]
    };
    let mut raw = Vec::new();
    let mut failures = 0;
    for i in 0..n {
        for j in 0..n {
            if admits_zero([at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)]) {
                let origin = [i as f64 * h, j as f64 * h];
                if !refine(field, origin, h, cfg.max_depth, cfg, &mut raw) {
                    failures += 1;
                }
            }
        }
    }
    let mut out = CriticalPoints { newton_failures: failures, ..Default::default() };
    // dedup on a bucket grid of the dedup radius' cell size
    let bucket = |p: [f64; 2]| ((p[0] / h) as i64, (p[1] / h) as i64);
    let mut buckets: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    let nb = n as i64;
    for (x, jet) in raw {
        let p = [wrap(x[0], side), wrap(x[1], side)];
        let (bi, bj) = bucket(p);
        let dup = (-1..=1).any(|di| {
            (-1..=1).any(|dj| {
                buckets.get(&((bi + di).rem_euclid(nb), (bj + dj).rem_euclid(nb))).is_some_and(|v| {
                    v.iter().any(|&k| norm(torus_delta(out.points[k].position, p, side)) <= cfg.dedup_radius)
                })
            })
        });
        if dup {
            continue;
        }
        let det = jet.hessian[0] * jet.hessian[2] - jet.hessian[1] * jet.hessian[1];
        match classify(jet.hessian) {
            Ok(kind) => {
                buckets.entry((bi.rem_euclid(nb), bj.rem_euclid(nb))).or_default().push(out.points.len());
                out.points.push(CriticalPoint {
                    position: p,
                    kind,
                    hessian_det: det,
                    hessian_trace: jet.hessian[0] + jet.hessian[2],
                    gradient_residual: norm(jet.gradient),
                });
            }
            Err(_) => out.degenerate += 1,
        }
    }
    out
}

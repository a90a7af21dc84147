//! Invariant suite behind `kacrice validate`.

use std::f64::consts::PI;

use kacrice_core::covariance::{taylor_coeffs, Model};
use kacrice_core::kacrice::{
    a_f_identity, a_f_quotient, bc_coefficients, decay_exponent_fit, density_k1, grid, mc_abs_det_y, BatchRunner, SphereQuadrature, SPHERE_AREA,
};
use kacrice_core::linalg::{jacobi_eigen, rel_diff, Lu, Mat};
use kacrice_core::moments::{
    conditional_delta, det_a, eigen_system, printed_deviation, schur_complement, sigma_blocks, sigma_direct, BlockCovariance, Entry,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Check groups, in execution order.
pub const GROUPS: [&str; 9] = ["af", "series", "sigma", "det", "delta", "eigen", "sphere", "hessian", "bc"];

/// Size of the perturbation added by [`Fault::Gamma2`].
pub const FAULT_SIZE: f64 = 1e-3;

/// Deliberate corruption of the structured covariance, to show the suite notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Adds 1e-3 to the gamma2 entry.
    Gamma2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub group: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Default)]
pub struct Options {
    /// Groups to run; all when empty.
    pub only: Vec<String>,
    pub fault: Option<Fault>,
    pub seed: u64,
}


fn blocks(m: &Model, r: f64, fault: Option<Fault>) -> BlockCovariance {
    let mut b = sigma_blocks(m, r).expect("catalog kernels are valid at validation radii");
    if fault == Some(Fault::Gamma2) {
        b.perturb(Entry::Gamma2, FAULT_SIZE);
    }
    b
}

fn check(name: impl Into<String>, group: &'static str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), group, passed, detail }
}

/// Largest relative gap between sorted spectra.
fn spectrum_gap(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    let (mut a, mut b) = (*a, *b);
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let scale = a.iter().chain(&b).fold(0.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn af_identity(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let g4 = 0.05 + 2.0 * rng.random::<f64>();
        let g6 = g4 * g4 / 2.5 * (1.0 + 1e-3 + 4.0 * rng.random::<f64>());
        let (q, i) = (a_f_quotient(g4, g6), a_f_identity(g4, g6));
        worst = worst.max((q - i).abs() / i.abs());
    }
    check("af-identity", "af", worst <= 1e-12, format!("max rel diff {worst:.3e} over 1000 pairs (tol 1e-12)"))
}

/// Log-log slope of `|exact - printed series|` over `[1e-3, 1e-1]` for every entry.
pub fn series_slopes(m: &Model, fault: Option<Fault>) -> Vec<(Entry, f64)> {
    let c = taylor_coeffs(m).expect("catalog coefficients");
    Entry::ALL
        .iter()
        .map(|&e| {
            let pts: Vec<(f64, f64, f64)> = grid(1e-3, 1e-1, 9, true)
                .into_iter()
                .map(|r| {
                    let b = blocks(m, r, fault);
                    let printed = printed_deviation(&c, r, e);
                    (r, (b.deviation(e) - printed).abs(), 0.0)
                })
                .collect();
            (e, decay_exponent_fit(&pts).map(|f| f.slope).unwrap_or(f64::NAN))
        })
        .collect()
}

fn series(m: &Model, fault: Option<Fault>) -> Check {
    let slopes = series_slopes(m, fault);
    let ok = slopes.iter().all(|&(e, s)| s >= if e.is_beta() { 4.5 } else { 5.5 });
    let detail = slopes.iter().map(|(e, s)| format!("{} {s:.2}", e.name())).collect::<Vec<_>>().join(", ");
    check(format!("series-{m}"), "series", ok, format!("residual slopes: {detail} (need 5.5, beta 4.5)"))
}

fn sigma(m: &Model, fault: Option<Fault>) -> Check {
    let worst = [0.05, 0.3, 0.7, 1.5].iter().map(|&r| rel_diff(&blocks(m, r, fault).sigma(), &sigma_direct(m, [0.0, 0.0], [0.0, r]))).fold(0.0, f64::max);
    check(format!("sigma-{m}"), "sigma", worst <= 1e-10, format!("structured vs tensor covariance: max rel diff {worst:.3e} (tol 1e-10)"))
}

fn det(m: &Model, fault: Option<Fault>) -> Check {
    let mut worst = 0.0f64;
    for r in [0.05, 0.1, 0.3, 1.0] {
        let s = sigma_direct(m, [0.0, 0.0], [0.0, r]);
        let a4: Mat<4> = std::array::from_fn(|i| std::array::from_fn(|j| s[i][j]));
        let generic = Lu::new(&a4).det();
        let closed = det_a(&blocks(m, r, fault)).unwrap_or(f64::NAN);
        worst = worst.max((closed - generic).abs() / generic.abs());
    }
    // the generic determinant loses about 2 log10(1/r) digits to cancellation
    check(format!("det-a-{m}"), "det", worst <= 1e-8, format!("closed-form det A vs LU: max rel diff {worst:.3e} (tol 1e-8)"))
}

fn delta(m: &Model, fault: Option<Fault>) -> Check {
    let mut worst = 0.0f64;
    for r in [0.05, 0.1, 0.3] {
        let closed = conditional_delta(&blocks(m, r, fault)).map(|d| d.delta());
        let direct = schur_complement(&sigma_direct(m, [0.0, 0.0], [0.0, r]));
        worst = worst.max(match (closed, direct) {
            (Ok(a), Ok(b)) => rel_diff(&a, &b),
            _ => f64::INFINITY,
        });
    }
    check(format!("delta-{m}"), "delta", worst <= 1e-10, format!("closed-form vs Schur complement: max rel diff {worst:.3e} (tol 1e-10)"))
}

fn eigen(m: &Model, fault: Option<Fault>) -> Check {
    let (mut recon, mut spec) = (0.0f64, 0.0f64);
    for r in [0.05, 0.1, 0.3] {
        let Ok(d) = conditional_delta(&blocks(m, r, fault)) else {
            recon = f64::INFINITY;
            continue;
        };
        let e = eigen_system(&d);
        recon = recon.max(rel_diff(&e.reconstruct(), &d.delta()));
        let direct = schur_complement(&sigma_direct(m, [0.0, 0.0], [0.0, r])).unwrap_or([[f64::NAN; 6]; 6]);
        spec = spec.max(spectrum_gap(&e.lambda, &jacobi_eigen(&direct).0));
    }
    let ok = recon <= 1e-10 && spec <= 1e-10;
    check(format!("eigen-{m}"), "eigen", ok, format!("reconstruction {recon:.3e}, spectrum vs Jacobi {spec:.3e} (tol 1e-10)"))
}

fn sphere<R: BatchRunner + ?Sized>(seed: u64, runner: &R) -> Check {
    let e = SphereQuadrature::new(100_000, seed).integrate(runner, |_| 1.0);
    let tol = (3.0 * e.std_error).max(1e-12 * SPHERE_AREA);
    let ok = (e.value - SPHERE_AREA).abs() <= tol;
    check("sphere-area", "sphere", ok, format!("{:.10} vs pi^3 = {SPHERE_AREA:.10} (tol {tol:.2e})", e.value))
}

fn hessian<R: BatchRunner + ?Sized>(seed: u64, runner: &R) -> Vec<Check> {
    let e = mc_abs_det_y(&SphereQuadrature::new(1_000_000, seed), runner);
    let want = 4.0 / 3f64.sqrt();
    let rwm = density_k1(&taylor_coeffs(&Model::RandomWave).expect("rwm"));
    let bf = density_k1(&taylor_coeffs(&Model::BargmannFock).expect("bf"));
    vec![
        check(
            "abs-det-hessian",
            "hessian",
            (e.value - want).abs() <= 3.0 * e.std_error,
            format!("E|Y1 Y3 - Y2^2| = {:.5} +- {:.1e} vs 4/sqrt3 = {want:.5}", e.value, e.std_error),
        ),
        check(
            "density",
            "hessian",
            (rwm.per_area - 2.0 / (3f64.sqrt() * PI)).abs() < 1e-15 && (bf.per_area - 4.0 / (3f64.sqrt() * PI)).abs() < 1e-15,
            format!("c_F rwm {:.5}, bf {:.5}", rwm.per_area, bf.per_area),
        ),
    ]
}

fn bc(seed: u64) -> Check {
    let c = taylor_coeffs(&Model::RandomWave).expect("rwm");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut s: [f64; 6] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        s.iter_mut().for_each(|x| *x /= n);
        worst = worst.max(bc_coefficients(&c, &s).map(|b| b.b11.abs()).unwrap_or(f64::INFINITY));
    }
    check("b11-rwm", "bc", worst <= 1e-10, format!("max |b11| over 100 unit vectors {worst:.2e} (tol 1e-10)"))
}

/// Runs the selected checks.
pub fn run<R: BatchRunner + ?Sized>(opts: &Options, runner: &R) -> Vec<Check> {
    let wanted = |g: &str| opts.only.is_empty() || opts.only.iter().any(|o| o == g);
    let mut out = Vec::new();
    let catalog = Model::catalog();
    for g in GROUPS {
        if !wanted(g) {
            continue;
        }
        match g {
            "af" => out.push(af_identity(opts.seed)),
            "series" => out.extend(catalog.iter().map(|m| series(m, opts.fault))),
            "sigma" => out.extend(catalog.iter().map(|m| sigma(m, opts.fault))),
            "det" => out.extend(catalog.iter().map(|m| det(m, opts.fault))),
            "delta" => out.extend(catalog.iter().map(|m| delta(m, opts.fault))),
            "eigen" => out.extend(catalog.iter().map(|m| eigen(m, opts.fault))),
            "sphere" => out.push(sphere(opts.seed, runner)),
            "hessian" => out.extend(hessian(opts.seed, runner)),
            "bc" => out.push(bc(opts.seed)),
            _ => unreachable!(),
        }
    }
    out
}

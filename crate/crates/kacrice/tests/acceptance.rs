//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest harness so
//! every line is printed; exits nonzero when any criterion fails. Arguments that are
//! not flags select criteria by number.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use kacrice::parallel::Parallel;
use kacrice::simulate::{simulate, SimulateOptions};
use kacrice::validate::series_slopes;
use kacrice_core::covariance::{taylor_coeffs, Model};
use kacrice_core::kacrice::{
    a_f_identity, a_f_quotient, asymptotic_constants, bc_coefficients, decay_exponent_fit, grid, k2_with, mc_abs_det_y, second_factorial_moment_with,
    typed_k2_with, SphereQuadrature, SPHERE_AREA,
};
use kacrice_core::moments::{conditional_delta, eigen_system, schur_complement, sigma_blocks, sigma_direct};
use kacrice_core::types::TypePair;
use nalgebra::{Matrix6, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn runner() -> Parallel {
    Parallel::new(None).expect("thread pool")
}

fn report(n: u32, passed: bool, budget: Duration, start: Instant, detail: &str) -> bool {
    let took = start.elapsed();
    let ok = passed && took <= budget;
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n}: {status}: {detail} [{:.2} s, budget {:.0} s]", took.as_secs_f64(), budget.as_secs_f64());
    ok
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1_af_identity() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        // admissible: g6 > g4^2 / 2.5
        let g4 = 0.05 + 2.0 * rng.random::<f64>();
        let g6 = g4 * g4 / 2.5 * (1.0 + 1e-3 + 4.0 * rng.random::<f64>());
        worst = worst.max(rel(a_f_quotient(g4, g6), a_f_identity(g4, g6)));
    }
    report(1, worst <= 1e-12, Duration::from_secs(1), start, &format!("max rel diff {worst:.2e} over 1000 pairs (tol 1e-12)"))
}

fn criterion_2_series() -> bool {
    let start = Instant::now();
    let mut worst_ag = f64::INFINITY;
    let mut worst_b = f64::INFINITY;
    for m in Model::catalog() {
        for (e, s) in series_slopes(&m, None) {
            if e.is_beta() {
                worst_b = worst_b.min(s);
            } else {
                worst_ag = worst_ag.min(s);
            }
        }
    }
    let ok = worst_ag >= 5.5 && worst_b >= 4.5;
    report(2, ok, Duration::from_secs(1), start, &format!("smallest residual slope: alpha/gamma {worst_ag:.3} (need 5.5), beta {worst_b:.3} (need 4.5)"))
}

fn criterion_3_conditional_covariance() -> bool {
    let start = Instant::now();
    let (mut schur, mut recon, mut spectrum) = (0.0f64, 0.0f64, 0.0f64);
    for m in Model::catalog() {
        for r in [0.05, 0.1, 0.3] {
            let d = conditional_delta(&sigma_blocks(&m, r).unwrap()).unwrap();
            let delta = d.delta();
            let direct = schur_complement(&sigma_direct(&m, [0.0, 0.0], [0.0, r])).unwrap();
            let scale = delta.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
            let max_gap = |a: &[[f64; 6]; 6], b: &[[f64; 6]; 6]| a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale;
            schur = schur.max(max_gap(&delta, &direct));

            let e = eigen_system(&d);
            recon = recon.max(max_gap(&e.reconstruct(), &delta));

            let generic = SymmetricEigen::new(Matrix6::from_fn(|i, j| delta[i][j]));
            let mut ours = e.lambda;
            let mut theirs: Vec<f64> = generic.eigenvalues.iter().copied().collect();
            ours.sort_by(f64::total_cmp);
            theirs.sort_by(f64::total_cmp);
            let top = ours[5].abs();
            spectrum = spectrum.max(ours.iter().zip(&theirs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / top);
        }
    }
    let ok = schur <= 1e-10 && recon <= 1e-10 && spectrum <= 1e-10;
    report(3, ok, Duration::from_secs(1), start, &format!("Schur complement {schur:.2e}, reconstruction {recon:.2e}, spectrum vs nalgebra {spectrum:.2e} (tol 1e-10)"))
}

fn criterion_4_k2_asymptote() -> bool {
    let start = Instant::now();
    let pool = runner();
    let quad = SphereQuadrature::new(10_000_000, 4);
    let mut ok = true;
    let mut parts = Vec::new();
    for (m, target) in [(Model::RandomWave, 0.0048734), (Model::BargmannFock, 0.11699)] {
        let e = k2_with(&m, 0.01, &quad, &pool).unwrap();
        let c = asymptotic_constants(&taylor_coeffs(&m).unwrap()).unwrap();
        let d = rel(e.value, target);
        ok &= d <= 0.01;
        parts.push(format!(
            "{m} {:.6} +- {:.1e} vs {target} (rel {:.3}; closed-form a_F {:.7}, ratio {:.4})",
            e.value,
            e.std_error,
            d,
            c.a_f,
            e.value / c.a_f
        ));
    }
    report(4, ok, Duration::from_secs(120), start, &parts.join("; "))
}

fn criterion_5_hessian_moment() -> bool {
    let start = Instant::now();
    let e = mc_abs_det_y(&SphereQuadrature::new(1_000_000, 5), &runner());
    let want = 4.0 / 3f64.sqrt();
    let z = (e.value - want) / e.std_error;
    report(5, z.abs() <= 3.0, Duration::from_secs(10), start, &format!("E|Y1 Y3 - Y2^2| = {:.5} +- {:.1e} vs {want:.5} ({z:+.2} SE)", e.value, e.std_error))
}

fn criterion_6_typed_exponents() -> bool {
    let start = Instant::now();
    let pool = runner();
    let quad = SphereQuadrature::new(200_000, 6);
    let radii = grid(0.05, 0.4, 8, true);
    let exponent = |m: &Model, pair: &str| {
        let pair: TypePair = pair.parse().unwrap();
        let pts: Vec<(f64, f64, f64)> = radii
            .iter()
            .map(|&r| {
                let e = typed_k2_with(m, r, pair, &quad, &pool).unwrap();
                (r, e.value, e.std_error)
            })
            .collect();
        decay_exponent_fit(&pts).map(|f| f.slope).map_err(|e| e.to_string())
    };
    let mut ok = true;
    let mut parts = Vec::new();
    let mut need = |label: String, fit: Result<f64, String>, lo: f64, hi: f64| {
        match fit {
            Ok(s) => {
                let pass = s >= lo && s <= hi;
                ok &= pass;
                parts.push(format!("{label} {s:.3}{}", if pass { "" } else { " (out of range)" }));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{label} no fit ({e})"));
            }
        }
    };
    for m in [Model::RandomWave, Model::BargmannFock, Model::Mixture { weight: 0.5 }] {
        for p in ["min,min", "max,max", "saddle,saddle"] {
            need(format!("{m} {p}"), exponent(&m, p), 2.7, f64::INFINITY);
        }
    }
    need("rwm max,min".into(), exponent(&Model::RandomWave, "max,min"), 6.0, f64::INFINITY);
    need("mix:0.5 max,min".into(), exponent(&Model::Mixture { weight: 0.5 }, "max,min"), 2.5, 4.5);

    let c = taylor_coeffs(&Model::RandomWave).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut b11 = 0.0f64;
    for _ in 0..100 {
        let mut s: [f64; 6] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        s.iter_mut().for_each(|x| *x /= n);
        b11 = b11.max(bc_coefficients(&c, &s).unwrap().b11.abs());
    }
    ok &= b11 <= 1e-10;
    parts.push(format!("rwm max |b11| {b11:.1e}"));
    report(6, ok, Duration::from_secs(600), start, &parts.join("; "))
}

fn criterion_7_simulation() -> bool {
    let start = Instant::now();
    let o = SimulateOptions {
        model: Model::BargmannFock,
        side: 30.0,
        n_samples: 200,
        seed: 7,
        edges: (0..=9).map(|i| 0.1 + 0.1 * i as f64).collect(),
        step: None,
        mode_budget: kacrice_core::fieldsim::DEFAULT_MODE_BUDGET,
        scale: 1.0,
        typed: None,
        k2_samples: 100_000,
        keep_points: false,
    };
    let rep = simulate(&o, &runner()).unwrap();
    let want = 4.0 / (3f64.sqrt() * PI);
    let z = (rep.density - want) / rep.density_se;
    let worst = rep.bins.iter().map(|b| (b.ratio - 1.0).abs()).fold(0.0, f64::max);
    let verdict = rep.limit.as_ref().map(|l| l.verdict.clone()).unwrap_or_default();
    let ok = z.abs() <= 3.0 && worst <= 0.1;
    report(
        7,
        ok,
        Duration::from_secs(1800),
        start,
        &format!(
            "density {:.5} +- {:.5} vs {want:.5} ({z:+.2} SE); worst bin |ratio - 1| {worst:.3}; Morse {:.1}%; near-diagonal constant: {verdict}",
            rep.density,
            rep.density_se,
            100.0 * rep.morse_fraction
        ),
    )
}

fn criterion_8_sphere_and_second_moment() -> bool {
    let start = Instant::now();
    let pool = runner();
    let area = SphereQuadrature::new(100_000, 8).integrate(&pool, |_| 1.0);
    let area_ok = (area.value - SPHERE_AREA).abs() <= (3.0 * area.std_error).max(1e-12 * SPHERE_AREA);

    let r = 0.05;
    let m = second_factorial_moment_with(&Model::RandomWave, r, &SphereQuadrature::new(200_000, 8), &pool).unwrap();
    let c = asymptotic_constants(&taylor_coeffs(&Model::RandomWave).unwrap()).unwrap();
    let target = c.a_f * PI * PI * r.powi(4);
    let d = rel(m.value, target);
    report(
        8,
        area_ok && d <= 0.05,
        Duration::from_secs(30),
        start,
        &format!(
            "constant integrand {:.10} vs pi^3 {SPHERE_AREA:.10}; E[N(N-1)] at r = 0.05: {:.4e} +- {:.1e} vs a_F pi^2 r^4 = {target:.4e} (rel {d:.3}, ratio {:.4})",
            area.value,
            m.value,
            m.std_error,
            m.value / target
        ),
    )
}

fn main() {
    let criteria: [(u32, fn() -> bool); 8] = [
        (1, criterion_1_af_identity),
        (2, criterion_2_series),
        (3, criterion_3_conditional_covariance),
        (4, criterion_4_k2_asymptote),
        (5, criterion_5_hessian_moment),
        (6, criterion_6_typed_exponents),
        (7, criterion_7_simulation),
        (8, criterion_8_sphere_and_second_moment),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, run) in criteria {
        if (wanted.is_empty() || wanted.contains(&n)) && !run() {
            failed.push(n.to_string());
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}

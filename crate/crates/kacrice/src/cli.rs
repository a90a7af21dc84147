//! The `kacrice` command line.
//!
//! Exit codes: 0 ok, 1 usage or other error, 2 inadmissible coefficients,
//! 3 under-resolved quadrature, 4 sampler failure, 5 validation failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kacrice_core::covariance::{check_admissibility, normalize, taylor_coeffs, Model, RadialKernel};
use kacrice_core::kacrice::{asymptotic_constants, decay_exponent_fit, k2_with, typed_k2_with, Method, SphereQuadrature};
use kacrice_core::types::TypePair;
use kacrice_core::Error;
use serde::Serialize;

use crate::config::{parse_count, Format, RGrid, RunConfig};
use crate::output::{sig12, sink, write_json, Table};
use crate::parallel::{Parallel, THREADS_ENV};
use crate::simulate::{simulate, SimulateOptions};
use crate::validate::{self, Fault};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INADMISSIBLE: i32 = 2;
pub const EXIT_QUADRATURE: i32 = 3;
pub const EXIT_SAMPLER: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "kacrice", version, about = "Critical point statistics of planar isotropic Gaussian fields")]
pub struct Cli {
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Taylor coefficients g2..g8 of the normalized covariance and admissibility.
    Coeffs(CoeffsArgs),
    /// Two-point function K2(r) on a radius grid, with the r -> 0 constants.
    K2(K2Args),
    /// Simulate fields on a torus and compare counts and pair correlations with K2.
    Simulate(SimulateArgs),
    /// Run the invariant suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pair(s: &str) -> Result<TypePair, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    /// Covariance model: rwm, bf, mix:<w>, poly:<g4>,<g6>,<g8>.
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct K2Args {
    /// Covariance model: rwm, bf, mix:<w>, poly:<g4>,<g6>,<g8>.
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    /// Radius grid start:stop:count.
    #[arg(long = "r", default_value = "0.01:0.5:20")]
    pub r: RGrid,
    /// Space the grid evenly in log r.
    #[arg(long)]
    pub log: bool,
    /// Gaussian samples per radius (accepts 1e6).
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Quadrature: mc (plain draws), qmc (randomized Halton, usually far smaller
    /// errors) or line (one coordinate in closed form).
    #[arg(long, default_value = "mc", value_parser = |s: &str| s.parse::<Method>().map_err(|e| e.to_string()))]
    pub method: Method,
    /// Independent batches for the standard error.
    #[arg(long, default_value_t = 32)]
    pub batches: usize,
    /// Fail (exit 3) when a relative standard error exceeds this.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Restrict to an ordered pair of types, e.g. min,min or extremum,saddle.
    #[arg(long, value_parser = parse_pair)]
    pub typed: Option<TypePair>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Covariance model: rwm, bf, mix:<w>.
    #[arg(long, value_parser = parse_model)]
    pub model: Model,
    /// Side of the torus.
    #[arg(long = "L", default_value_t = 30.0)]
    pub side: f64,
    /// Number of independent samples.
    #[arg(long = "n", default_value_t = 200)]
    pub n_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pair-distance bins lo:hi:count.
    #[arg(long, default_value = "0.1:1.0:9")]
    pub bins: RGrid,
    /// Finder grid step (default 0.12 over the rms wavenumber).
    #[arg(long)]
    pub step: Option<f64>,
    /// Maximum number of spectral modes.
    #[arg(long, default_value_t = kacrice_core::fieldsim::DEFAULT_MODE_BUDGET)]
    pub mode_budget: usize,
    /// Simulate C(scale r) instead of C(r).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Restrict pair counts to an ordered pair of types.
    #[arg(long, value_parser = parse_pair)]
    pub typed: Option<TypePair>,
    /// Gaussian samples per node for the analytic K2 of each bin.
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    pub k2_samples: u64,
    /// Also write every critical point to this CSV file.
    #[arg(long)]
    pub points_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Comma-separated check groups: af, series, sigma, det, delta, eigen, sphere, hessian, bc.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Corrupt the structured covariance to exercise the suite.
    #[arg(long, value_enum)]
    pub inject_fault: Option<Fault>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InadmissibleCoefficients { .. } => EXIT_INADMISSIBLE,
        Error::QuadratureUnderResolved { .. } => EXIT_QUADRATURE,
        Error::ModeBudgetTooSmall { .. } | Error::NoSpectralMeasure(_) => EXIT_SAMPLER,
        _ => EXIT_USAGE,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(exit_code(&e), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_USAGE, format!("i/o error: {e}"))
    }
}

fn emit<T: Serialize>(out: &OutputArgs, table: &Table, json: &T) -> Result<(), Failure> {
    let w = sink(out.out.as_deref())?;
    match out.format {
        Format::Csv => table.write_csv(w)?,
        Format::Json => write_json(w, json)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct CoeffsRecord {
    model: String,
    g2: f64,
    g4: f64,
    g6: f64,
    g8: f64,
    slack: f64,
    degenerate: bool,
    length_scale: f64,
    warnings: Vec<&'static str>,
}

fn cmd_coeffs(a: &CoeffsArgs) -> Result<(), Failure> {
    let raw = taylor_coeffs(&a.model)?;
    let scaled = normalize(a.model)?;
    let c = taylor_coeffs(&scaled)?;
    let report = check_admissibility(&c)?;
    let mut warnings = Vec::new();
    for (on, name) in [
        (report.degenerate, "degenerate"),
        (report.warn_b_sign, "warn_b_sign"),
        (report.warn_g8, "warn_g8"),
        (report.warn_unrealizable, "warn_unrealizable"),
    ] {
        if on {
            warnings.push(name);
        }
    }
    let rec = CoeffsRecord {
        model: a.model.to_string(),
        g2: raw.g2,
        g4: c.g4,
        g6: c.g6,
        g8: c.g8,
        slack: report.slack,
        degenerate: report.degenerate,
        length_scale: scaled.length_scale(),
        warnings,
    };
    let mut t = Table::new(&["model", "g2", "g4", "g6", "g8", "slack", "degenerate", "length_scale", "warnings"]);
    t.push(vec![
        rec.model.clone(),
        sig12(rec.g2),
        sig12(rec.g4),
        sig12(rec.g6),
        sig12(rec.g8),
        sig12(rec.slack),
        rec.degenerate.to_string(),
        sig12(rec.length_scale),
        rec.warnings.join(";"),
    ]);
    emit(&a.output, &t, &rec)
}

#[derive(Serialize)]
struct K2Record {
    model: String,
    kind: &'static str,
    r: f64,
    value: f64,
    std_error: f64,
    n_samples: u64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    type_pair: Option<String>,
}

#[derive(Serialize)]
struct FitRecord {
    slope: f64,
    std_error: f64,
    n_points: usize,
}

#[derive(Serialize)]
struct K2Output {
    config: RunConfig,
    records: Vec<K2Record>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<FitRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_error: Option<String>,
}

fn cmd_k2(a: &K2Args, threads: Option<usize>, runner: &Parallel) -> Result<(), Failure> {
    let grid = RGrid { log: a.log, ..a.r };
    let quad = SphereQuadrature { n_samples: a.samples, seed: a.seed, batches: a.batches.max(2), method: a.method, tolerance: a.tolerance };
    let model = a.model.to_string();
    let pair = a.typed.map(|p| p.to_string());
    let mut records = Vec::new();
    for r in grid.points() {
        let e = match a.typed {
            Some(p) => typed_k2_with(&a.model, r, p, &quad, runner)?,
            None => k2_with(&a.model, r, &quad, runner)?,
        };
        records.push(K2Record { model: model.clone(), kind: "k2", r, value: e.value, std_error: e.std_error, n_samples: e.n_samples, seed: a.seed, type_pair: pair.clone() });
    }
    let mut footer = Vec::new();
    let (mut fit, mut fit_error) = (None, None);
    if a.typed.is_none() {
        let c = asymptotic_constants(&taylor_coeffs(&a.model)?)?;
        records.push(K2Record { model: model.clone(), kind: "asymptote", r: 0.0, value: c.a_f, std_error: 0.0, n_samples: 0, seed: a.seed, type_pair: None });
        records.push(K2Record { model: model.clone(), kind: "limit", r: 0.0, value: c.k2_limit, std_error: 0.0, n_samples: 0, seed: a.seed, type_pair: None });
        footer.push(format!("asymptote: closed-form a_F = {}", sig12(c.a_f)));
        footer.push(format!("limit: r -> 0 limit of the sphere integral = {} ({} a_F)", sig12(c.k2_limit), sig12(c.k2_limit / c.a_f)));
    } else {
        let pts: Vec<(f64, f64, f64)> = records.iter().map(|r| (r.r, r.value, r.std_error)).collect();
        match decay_exponent_fit(&pts) {
            Ok(f) => {
                footer.push(format!("fit: decay exponent {} +- {} over {} points", sig12(f.slope), sig12(f.std_error), f.n_points));
                fit = Some(FitRecord { slope: f.slope, std_error: f.std_error, n_points: f.n_points });
            }
            Err(e) => {
                footer.push(format!("fit: unavailable ({e})"));
                fit_error = Some(e.to_string());
            }
        }
    }
    let mut t = Table::new(&["model", "kind", "r", "value", "std_error", "n_samples", "seed", "type_pair"]);
    for r in &records {
        t.push(vec![
            r.model.clone(),
            r.kind.into(),
            sig12(r.r),
            sig12(r.value),
            sig12(r.std_error),
            r.n_samples.to_string(),
            r.seed.to_string(),
            r.type_pair.clone().unwrap_or_default(),
        ]);
    }
    t.footer = footer;
    let config = RunConfig { model, r_grid: Some(grid), samples: a.samples, seed: a.seed, out: a.output.out.clone(), format: a.output.format, threads };
    emit(&a.output, &t, &K2Output { config, records, fit, fit_error })
}

fn write_points(path: &Path, res: &kacrice_core::fieldsim::SimulationResult) -> Result<(), Failure> {
    let mut t = Table::new(&["sample_id", "x", "y", "type", "hess_det", "hess_trace"]);
    for s in &res.samples {
        for p in &s.points {
            t.push(vec![
                s.index.to_string(),
                sig12(p.position[0]),
                sig12(p.position[1]),
                p.kind.to_string(),
                sig12(p.hessian_det),
                sig12(p.hessian_trace),
            ]);
        }
    }
    t.write_csv(sink(Some(path))?)?;
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs, runner: &Parallel) -> Result<(), Failure> {
    if !(a.bins.count >= 1) {
        return Err(Failure::new(EXIT_USAGE, "need at least one bin"));
    }
    let edges: Vec<f64> = (0..=a.bins.count).map(|i| a.bins.start + (a.bins.stop - a.bins.start) * i as f64 / a.bins.count as f64).collect();
    let o = SimulateOptions {
        model: a.model,
        side: a.side,
        n_samples: a.n_samples,
        seed: a.seed,
        edges,
        step: a.step,
        mode_budget: a.mode_budget,
        scale: a.scale,
        typed: a.typed,
        k2_samples: a.k2_samples,
        keep_points: a.points_out.is_some(),
    };
    let rep = simulate(&o, runner)?;
    if let (Some(path), Some(res)) = (&a.points_out, &rep.result) {
        write_points(path, res)?;
    }
    let mut t = Table::new(&["r_lo", "r_hi", "k2_hat", "std_err", "n_pairs", "k2_analytic", "ratio", "ratio_se"]);
    for b in &rep.bins {
        t.push(vec![sig12(b.r_lo), sig12(b.r_hi), sig12(b.k2_hat), sig12(b.std_err), b.n_pairs.to_string(), sig12(b.k2_analytic), sig12(b.ratio), sig12(b.ratio_se)]);
    }
    t.footer.push(format!(
        "model {} L {} samples {} seed {} scale {} modes {} truncated mass {} grid {}",
        rep.model,
        rep.side,
        rep.n_samples,
        rep.seed,
        rep.scale,
        rep.n_modes,
        sig12(rep.truncated_mass),
        rep.grid_cells
    ));
    t.footer.push(format!(
        "types: min {} max {} saddle {}; newton failures {}",
        sig12(rep.fraction_min),
        sig12(rep.fraction_max),
        sig12(rep.fraction_saddle),
        rep.newton_failures
    ));
    if let Some(l) = &rep.limit {
        let rwm = l.rwm_closed_form.map(|v| format!(", known random-wave value {}", sig12(v))).unwrap_or_default();
        t.footer.push(format!(
            "K2(0+): empirical {} +- {}; a_F {} ({:+.2} SE); sphere-integral limit {} ({:+.2} SE){rwm}",
            sig12(l.empirical_limit),
            sig12(l.empirical_limit_se),
            sig12(l.a_f),
            l.z_a_f,
            sig12(l.k2_limit),
            l.z_k2_limit
        ));
    }
    for v in &rep.verdicts {
        t.footer.push(format!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail));
    }
    emit(&a.output, &t, &rep)
}

fn cmd_validate(a: &ValidateArgs, runner: &Parallel) -> Result<(), Failure> {
    for g in &a.only {
        if !validate::GROUPS.contains(&g.as_str()) {
            return Err(Failure::new(EXIT_USAGE, format!("unknown check group {g:?}; known: {}", validate::GROUPS.join(", "))));
        }
    }
    let opts = validate::Options { only: a.only.clone(), fault: a.inject_fault, seed: a.seed };
    let checks = validate::run(&opts, runner);
    let mut t = Table::new(&["check", "group", "status", "detail"]);
    for c in &checks {
        t.push(vec![c.name.clone(), c.group.into(), if c.passed { "pass" } else { "FAIL" }.into(), c.detail.clone()]);
    }
    emit(&a.output, &t, &checks)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VALIDATION, format!("failed checks: {}", failed.join(", "))))
    }
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<(), Failure> {
    let threads = cli.threads.or_else(Parallel::threads_from_env);
    let runner = Parallel::new(threads).map_err(|e| Failure::new(EXIT_USAGE, format!("thread pool: {e}")))?;
    match &cli.command {
        Command::Coeffs(a) => cmd_coeffs(a),
        Command::K2(a) => cmd_k2(a, threads, &runner),
        Command::Simulate(a) => cmd_simulate(a, &runner),
        Command::Validate(a) => cmd_validate(a, &runner),
    }
}

/// Parses `args`, runs, reports errors on standard error and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = std::io::stdout().flush();
            eprintln!("kacrice: {}", f.message);
            f.code
        }
    }
}

//! `natspec` command line: decomposition, density scans, spectral radii,
//! Kronecker solves and the verification suite.
//!
//! Exit status is 0 on success, 1 when a verification or search fails, and
//! 2 for bad input. JSON reports carry a `generated_at` timestamp on their
//! own second line; everything else is a function of the arguments.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::decomposition::{
    decompose, verify_decomposition, DecompositionOptions, GeneratorStrategy, RadiusMode,
    VerifyOptions,
};
use crate::error::{Error, Result};
use crate::io::{angle_to_json, read_measure, write_measure};
use crate::kronecker::{hit_target, solve, KroneckerProblem, Method, Parity, TargetOptions};
use crate::measure::{PowerBudget, TransformEvaluator, C64};
use crate::spectrum::{
    char_polynomial, csv_error, density_scan, fekete_bound, natural_spectrum_check,
    spectrum_sample, torus_max, DENSITY_MIN_EXP,
};
use crate::suite::{run_suite, SuiteOptions, SQRT_3};

#[derive(Debug, Parser)]
#[command(
    name = "natspec",
    version,
    about = "Decompose measures on the circle into parts with natural spectrum"
)]
pub struct Cli {
    /// Worker threads for the data-parallel kernels; output never depends on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a measure into ν₀ + ν₁ + ν₂ and verify the result.
    Decompose(DecomposeArgs),
    /// Covering radius of {ρ̂(n) : |n| ≤ N} over the unit disk for N = 16, 32, ….
    DensityScan(DensityArgs),
    /// Bracket the spectral radius between a torus maximum and a Fekete bound.
    SpectralRadius(RadiusArgs),
    /// Simultaneous approximation, or a disk target for ρ̂ with --target.
    Kronecker(KroneckerArgs),
    /// Run the seeded invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct VerifyFlags {
    /// Coefficients |n| ≤ N are sampled.
    #[arg(long = "N", default_value_t = 10_000)]
    pub n: u64,
    /// Torus grid resolution per free generator.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Density and coverage tolerance, relative to the radius.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

impl VerifyFlags {
    fn options(&self) -> Result<VerifyOptions> {
        if !(self.tol > 0.0) || self.grid == 0 {
            return Err(Error::InvalidArgument(
                "--tol and --grid must be positive".into(),
            ));
        }
        Ok(VerifyOptions {
            n: self.n,
            grid: self.grid,
            tol: self.tol,
            ..VerifyOptions::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Measure JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for nu0.json, nu1.json, nu2.json and report.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// fekete, exact_discrete, or manual:R0,R1.
    #[arg(long, default_value = "fekete", value_parser = parse_radius_mode)]
    pub radius_mode: RadiusMode,
    /// default (√2, √3 with fallback) or fresh.
    #[arg(long, default_value = "default", value_parser = parse_strategy)]
    pub generators: GeneratorStrategy,
    /// Largest Fekete squaring step.
    #[arg(long, default_value_t = 8)]
    pub kmax: u32,
    #[command(flatten)]
    pub verify: VerifyFlags,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Largest N; a power of two, at least 16.
    #[arg(long = "N", default_value_t = 65_536)]
    pub n: u64,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub alpha: f64,
    #[arg(long, default_value_t = SQRT_3)]
    pub beta: f64,
    /// Directory for density_scan.csv; the table goes to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub kmax: u32,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Fekete stops when the relative improvement falls below this.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Coefficients |n| ≤ nmax enter the natural-spectrum comparison.
    #[arg(long, default_value_t = 10_000)]
    pub nmax: u64,
    /// Directory for spectral_radius.json and, for discrete input, spectrum.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KroneckerArgs {
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub alpha: f64,
    #[arg(long, default_value_t = SQRT_3)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub y: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub nmax: i64,
    /// scan or lattice.
    #[arg(long, default_value = "scan", value_parser = parse_method)]
    pub method: Method,
    /// Skip solutions with |n| below this.
    #[arg(long, default_value_t = 0)]
    pub min_abs_n: i64,
    /// Disk point RE,IM; solves |ρ̂(n) − w| < eps instead of the torus problem.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub target: Option<C64>,
    /// any, even or odd; used with --target.
    #[arg(long, default_value = "any", value_parser = parse_parity)]
    pub parity: Parity,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random measures per randomized check.
    #[arg(long, default_value_t = 10)]
    pub cases: usize,
    #[command(flatten)]
    pub verify: VerifyFlags,
    /// Directory for verify_report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_radius_mode(s: &str) -> std::result::Result<RadiusMode, String> {
    match s {
        "fekete" => Ok(RadiusMode::Fekete),
        "exact_discrete" => Ok(RadiusMode::ExactDiscrete),
        _ => {
            let rest = s.strip_prefix("manual:").ok_or_else(|| {
                format!("expected fekete, exact_discrete or manual:R0,R1, got {s:?}")
            })?;
            let (a, b) = rest
                .split_once(',')
                .ok_or("manual radii are written R0,R1")?;
            let r0 = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
            let r1 = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
            Ok(RadiusMode::Manual { r0, r1 })
        }
    }
}

fn parse_strategy(s: &str) -> std::result::Result<GeneratorStrategy, String> {
    match s {
        "default" => Ok(GeneratorStrategy::DefaultSqrt23),
        "fresh" => Ok(GeneratorStrategy::Fresh),
        _ => Err(format!("expected default or fresh, got {s:?}")),
    }
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "scan" => Ok(Method::Scan),
        "lattice" => Ok(Method::Lattice),
        _ => Err(format!("expected scan or lattice, got {s:?}")),
    }
}

fn parse_parity(s: &str) -> std::result::Result<Parity, String> {
    match s {
        "any" | "all" => Ok(Parity::Any),
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        _ => Err(format!("expected any, even or odd, got {s:?}")),
    }
}

fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or("complex numbers are written RE,IM")?;
    let re = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let im = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok(C64::new(re, im))
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Ok,
    Failed,
}

/// Pretty JSON with `"generated_at"` alone on the second line, so reruns
/// differ in that line only.
pub fn stamped_json<T: Serialize>(body: &T) -> Result<String> {
    let text = serde_json::to_string_pretty(body)?;
    let rest = text
        .strip_prefix("{\n")
        .ok_or_else(|| Error::InvalidArgument("report body must be a non-empty object".into()))?;
    let now = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    Ok(format!("{{\n  \"generated_at\": \"{now}\",\n{rest}\n"))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn cmd_decompose(args: &DecomposeArgs) -> Result<Outcome> {
    let mu = read_measure(&args.input)?;
    let verify = args.verify.options()?;
    let opts = DecompositionOptions {
        radius_mode: args.radius_mode,
        generator_strategy: args.generators,
        k_max: args.kmax,
        grid: args.verify.grid,
        ..DecompositionOptions::default()
    };
    let res = decompose(&mu, &opts)?;
    let report = verify_decomposition(&mu, &res, &verify);

    fs::create_dir_all(&args.out)?;
    write_measure(&args.out.join("nu0.json"), &res.nu0)?;
    write_measure(&args.out.join("nu1.json"), &res.nu1)?;
    write_measure(&args.out.join("nu2.json"), &res.nu2.clone().into())?;
    let body = json!({
        "radius_mode": args.radius_mode,
        "generator_strategy": args.generators,
        "basis": res.basis.generators().iter().map(|g| json!({"name": g.name, "value": g.value})).collect::<Vec<_>>(),
        "alpha": angle_to_json(&res.alpha, &res.basis),
        "beta": angle_to_json(&res.beta, &res.basis),
        "r0": res.r0,
        "r1": res.r1,
        "nu2_atoms": res.nu2.len(),
        "radius_evidence": res.evidence,
        "verification": report,
    });
    write_text(&args.out, "report.json", &stamped_json(&body)?)?;

    println!("R0 = {}  R1 = {}", res.r0, res.r1);
    for c in &report.checks {
        let status = serde_json::to_value(c.status)?;
        match (c.residual, c.threshold) {
            (Some(r), Some(t)) => println!(
                "{:<18} {:<7} {r:.3e} <= {t:.3e}",
                c.name,
                status.as_str().unwrap_or("")
            ),
            _ => println!("{:<18} {}", c.name, status.as_str().unwrap_or("")),
        }
    }
    Ok(if report.passed {
        Outcome::Ok
    } else {
        Outcome::Failed
    })
}

fn cmd_density_scan(args: &DensityArgs) -> Result<Outcome> {
    if !args.n.is_power_of_two() || args.n < 1 << DENSITY_MIN_EXP {
        return Err(Error::InvalidArgument(format!(
            "--N {} is not a power of two ≥ 16",
            args.n
        )));
    }
    let rows = density_scan(args.alpha, args.beta, args.n.trailing_zeros(), args.tol)?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for row in &rows {
            w.serialize(row).map_err(csv_error)?;
        }
        w.flush()?;
    }
    match &args.out {
        Some(dir) => {
            write_text(
                dir,
                "density_scan.csv",
                std::str::from_utf8(&buf).expect("csv output is UTF-8"),
            )?;
            if let Some(last) = rows.last() {
                println!(
                    "N = {}: all {:.6}, even {:.6}, odd {:.6}",
                    last.n, last.all, last.even, last.odd
                );
            }
        }
        None => print!("{}", String::from_utf8_lossy(&buf)),
    }
    Ok(Outcome::Ok)
}

fn cmd_spectral_radius(args: &RadiusArgs) -> Result<Outcome> {
    let mu = read_measure(&args.input)?;
    let report = fekete_bound(&mu, args.kmax, args.tol, &PowerBudget::default());
    let ev = TransformEvaluator::new(&mu);
    let sampled_sup = (-256..=256)
        .map(|n| ev.coefficient(n).norm())
        .fold(0.0, f64::max);
    let mut body = json!({
        "fekete": report,
        "sampled_sup": sampled_sup,
    });
    let mut ok = sampled_sup <= report.final_bound + 1e-9;
    if mu.is_discrete() {
        let poly = char_polynomial(&mu.disc)?;
        let m = torus_max(&poly, args.grid, 64)?;
        let check = natural_spectrum_check(&mu.disc, args.nmax, args.grid, 0.05)?;
        ok &= m.value <= report.final_bound + 1e-6 && check.passed;
        body["torus_max"] = json!(m.value);
        body["bracket"] = json!([m.value, report.final_bound]);
        body["width"] = json!(report.final_bound - m.value);
        body["natural_spectrum"] = serde_json::to_value(&check)?;
        println!(
            "bracket [{}, {}] width {:.3e}",
            m.value,
            report.final_bound,
            report.final_bound - m.value
        );
        if let Some(dir) = &args.out {
            let sample = spectrum_sample(&mu.disc, args.grid, 0)?;
            fs::create_dir_all(dir)?;
            sample.write_csv(fs::File::create(dir.join("spectrum.csv"))?)?;
        }
    } else {
        println!(
            "bound {} (mixed measure: no torus maximum)",
            report.final_bound
        );
    }
    if let Some(dir) = &args.out {
        write_text(dir, "spectral_radius.json", &stamped_json(&body)?)?;
    } else {
        println!("{}", serde_json::to_string_pretty(&body)?);
    }
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn cmd_kronecker(args: &KroneckerArgs) -> Result<Outcome> {
    let result = match args.target {
        Some(w) => {
            let opts = TargetOptions {
                parity: args.parity,
                n_max: args.nmax,
                method: args.method,
            };
            hit_target(args.alpha, args.beta, w, args.eps, &opts).map(serde_json::to_value)
        }
        None => {
            let p =
                KroneckerProblem::new(args.alpha, args.beta, args.x, args.y, args.eps, args.nmax)
                    .with_method(args.method)
                    .with_min_abs_n(args.min_abs_n);
            solve(&p).map(serde_json::to_value)
        }
    };
    let (body, outcome) = match result {
        Ok(v) => (json!({"found": true, "solution": v?}), Outcome::Ok),
        Err(Error::NotFound { n_max, best }) => (
            json!({"found": false, "n_max": n_max, "best": *best}),
            Outcome::Failed,
        ),
        Err(e) => return Err(e),
    };
    let text = serde_json::to_string_pretty(&body)?;
    println!("{text}");
    if let Some(dir) = &args.out {
        write_text(dir, "kronecker.json", &format!("{text}\n"))?;
    }
    Ok(outcome)
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome> {
    if args.cases == 0 {
        return Err(Error::InvalidArgument("--cases must be positive".into()));
    }
    let opts = SuiteOptions {
        seed: args.seed,
        cases: args.cases,
        verify: args.verify.options()?,
    };
    let report = run_suite(&opts)?;
    for c in &report.checks {
        println!(
            "{} {:<24} {} cases, worst {:.3e} (limit {:.3e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.metric,
            c.threshold
        );
    }
    if let Some(dir) = &args.out {
        write_text(dir, "verify_report.json", &stamped_json(&report)?)?;
    }
    Ok(if report.passed {
        Outcome::Ok
    } else {
        Outcome::Failed
    })
}

fn configure_workers(workers: Option<usize>) -> Result<()> {
    let Some(n) = workers else { return Ok(()) };
    if n == 0 {
        return Err(Error::InvalidArgument("--workers must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(())
}

/// Parses `args` and runs the subcommand.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = configure_workers(cli.workers).and_then(|()| match &cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::DensityScan(a) => cmd_density_scan(a),
        Command::SpectralRadius(a) => cmd_spectral_radius(a),
        Command::Kronecker(a) => cmd_kronecker(a),
        Command::Verify(a) => cmd_verify(a),
    });
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

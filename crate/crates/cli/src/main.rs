//! Command-line front end: verifies symmetry suites, factors the Dirac
//! operator into the separation scheme and evaluates separated solutions.
//!
//! Exit status is 0 when the outcome matches the scenario's expectation, 1
//! when it does not and 2 for configuration or usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use dirac2d::catalog::{scenario_names, Scenario, Suite};
use dirac2d::config::{load_scenario, parse_suites, to_config, ConfigError};
use dirac2d::separation::{eigen_residuals, factor_dirac, grid_csv, SeparationError};
use dirac2d::verify::{sample_points, suite_applicable, verify, Execution, VerifyOptions};

#[derive(Parser)]
#[command(name = "dirac2d", version, about = "Symmetry and separation checks for the 2D Dirac operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites on a configuration file or `catalog:<name>`.
    Verify {
        source: String,
        /// Suites to run (comma separated or repeated): clifford, geometry,
        /// conditions, commutator, classical or all.
        #[arg(long = "suite", default_value = "all")]
        suites: Vec<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Override the number of sample points.
        #[arg(long)]
        count: Option<usize>,
        /// Override the sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run every sample point on the calling thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Factor the Dirac operator into the separation scheme.
    Separate {
        source: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Evaluate the reference separated solution on a grid.
    Solve {
        source: String,
        #[arg(allow_hyphen_values = true)]
        mu: f64,
        #[arg(allow_hyphen_values = true)]
        nu: f64,
        /// Points per axis of the grid.
        grid: usize,
        out_csv: PathBuf,
    },
    /// List the built-in scenarios.
    List,
    /// Print a scenario as a configuration file.
    Config { source: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Verify { source, suites, format, count, seed, sequential } => {
            cmd_verify(&source, &suites, format, count, seed, sequential)
        }
        Command::Separate { source, format } => cmd_separate(&source, format),
        Command::Solve { source, mu, nu, grid, out_csv } => cmd_solve(&source, mu, nu, grid, &out_csv),
        Command::List => {
            for n in scenario_names() {
                println!("{n}");
            }
            Ok(true)
        }
        Command::Config { source } => {
            print!("{}", to_config(&load_scenario(&source)?));
            Ok(true)
        }
    }
}

/// Requested suites; `all` keeps the scenario's own suites that it has data for.
fn select_suites(sc: &Scenario, requested: &[String]) -> Result<Vec<Suite>, ConfigError> {
    let joined = requested.join(",");
    let all = joined.split(|c: char| c == ',' || c.is_whitespace()).any(|s| s == "all");
    let mut out = parse_suites(&joined)?;
    if all {
        out.retain(|&s| sc.suites.contains(&s) && suite_applicable(sc, s));
    }
    if out.is_empty() {
        return Err(ConfigError::EmptySuite);
    }
    Ok(out)
}

fn cmd_verify(source: &str, suites: &[String], format: Format, count: Option<usize>, seed: Option<u64>, sequential: bool) -> Result<bool> {
    let mut sc = load_scenario(source)?;
    if let Some(c) = count {
        if c == 0 {
            bail!("--count must be positive");
        }
        sc.sampling.count = c;
    }
    if let Some(s) = seed {
        sc.sampling.seed = s;
    }
    let suites = select_suites(&sc, suites)?;
    let mut opts = VerifyOptions::default();
    if sequential {
        opts.execution = Execution::Sequential;
    }
    let v = verify(&sc, &suites, &opts)?;
    match format {
        Format::Text => print!("{}", v.to_text()),
        Format::Json => println!("{}", v.to_json()),
    }
    Ok(v.pass())
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn cmd_separate(source: &str, format: Format) -> Result<bool> {
    let sc = load_scenario(source)?;
    let sys = sc.system();
    let points = sample_points(&sc.sampling);
    let mut first = None;
    for (idx, &pt) in points.iter().enumerate() {
        match factor_dirac(&sys, pt) {
            Ok(sp) => {
                first.get_or_insert((pt, sp));
            }
            Err(SeparationError::NotSeparable { entry, reason }) => {
                let diag = json!({
                    "scenario": sc.name,
                    "separable": false,
                    "entry": entry,
                    "reason": reason,
                    "point": [pt.0, pt.1],
                    "point_index": idx,
                });
                match format {
                    Format::Json => println!("{}", serde_json::to_string_pretty(&diag)?),
                    Format::Text => println!("{}: not separable at ({}, {}): {entry} {reason}", sc.name, pt.0, pt.1),
                }
                return Ok(false);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let (pt, sp) = first.ok_or_else(|| anyhow!("no sample points"))?;
    let f = &sc.fields;
    let potentials = json!({
        "A0": f.a[0].to_string(),
        "A1": f.a[1].to_string(),
        "V": f.v.to_string(),
        "Vhat": f.vhat.to_string(),
        "q": complex_json(f.q),
    });
    let scheme = sc.scheme.as_ref().map(|s| {
        json!({
            "kind": sc.chart.kind_name(),
            "X2": s.x2.to_string(), "X3": s.x3.to_string(),
            "Y1bar": s.y1bar.to_string(), "Y4bar": s.y4bar.to_string(),
            "C1": s.c1.to_string(), "C2": s.c2.to_string(), "C3": s.c3.to_string(), "C4": s.c4.to_string(),
            "R1": s.r1.to_string(),
        })
    });
    let values: serde_json::Map<String, Value> = sp.values().iter().map(|(n, z)| (n.to_string(), complex_json(*z))).collect();
    let out = json!({
        "scenario": sc.name,
        "separable": true,
        "points_checked": points.len(),
        "point": [pt.0, pt.1],
        "values": values,
        "scheme": scheme,
        "potentials": potentials,
    });
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&out)?),
        Format::Text => {
            println!("{}: separable at {} sample points", sc.name, points.len());
            println!("values at ({}, {}):", pt.0, pt.1);
            for (n, z) in sp.values() {
                println!("  {n} = {z}");
            }
            if let Some(s) = &sc.scheme {
                for (n, e) in [("C1", &s.c1), ("C2", &s.c2), ("C3", &s.c3), ("C4", &s.c4), ("R1", &s.r1)] {
                    println!("  {n}(x, y) = {e}");
                }
            }
            println!("potentials: A0 = {}, A1 = {}, V = {}, Vhat = {}", f.a[0], f.a[1], f.v, f.vhat);
        }
    }
    Ok(true)
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (range.0 + range.1)];
    }
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
}

fn companion_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "solution".into());
    csv.with_file_name(format!("{stem}.residual.json"))
}

fn cmd_solve(source: &str, mu: f64, nu: f64, grid: usize, out_csv: &Path) -> Result<bool> {
    if grid == 0 {
        return Err(ConfigError::EmptyGrid.into());
    }
    let sc = load_scenario(source)?;
    let scheme = sc.scheme.as_ref().ok_or_else(|| anyhow!("scenario {} has no separation scheme", sc.name))?;
    let reference = sc.solution.ok_or_else(|| anyhow!("scenario {} has no closed-form separated solution", sc.name))?;
    let sol = reference.instantiate(sc.sig, mu, nu);
    let psi = sol.spinor();
    let b = sc.sampling.sample_box.shrink(sc.sampling.margin);
    let csv = grid_csv(&psi, &linspace(b.x, grid), &linspace(b.y, grid))?;
    fs::write(out_csv, csv).with_context(|| format!("writing {}", out_csv.display()))?;

    let points = sample_points(&sc.sampling);
    let (dirac, symmetry) = eigen_residuals(&sc.system(), scheme, &psi, sol.mu(), sol.nu(), &points)?;
    let centre = (0.5 * (b.x.0 + b.x.1), 0.5 * (b.y.0 + b.y.1));
    let det = sol.completeness(centre);
    let pass = dirac <= sc.tol.rel && symmetry <= sc.tol.rel;
    let out = json!({
        "scenario": sc.name,
        "mu": mu,
        "nu": nu,
        "grid": grid,
        "csv": out_csv.display().to_string(),
        "dirac_eigen_residual": dirac,
        "symmetry_eigen_residual": symmetry,
        "completeness_determinant": det.map(complex_json),
        "completeness_point": [centre.0, centre.1],
        "residual_points": points.len(),
        "tolerance": sc.tol.rel,
        "pass": pass,
        "notes": sol.notes(),
    });
    let path = companion_path(out_csv);
    fs::write(&path, serde_json::to_string_pretty(&out)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    println!(
        "{}: wrote {} ({}x{} grid); Dirac residual {dirac:.3e}, symmetry residual {symmetry:.3e}; report {}",
        sc.name,
        out_csv.display(),
        grid,
        grid,
        path.display()
    );
    Ok(pass)
}

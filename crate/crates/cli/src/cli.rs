//! The `fraclap` command line.
//!
//! Exit codes: 0 when everything passes, 1 when a check or a computation
//! fails, 2 for configuration and usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fraclap_core::norms::gagliardo_seminorm;
use fraclap_core::ops::frac_laplacian;
use fraclap_core::poisson::wos_solve;
use fraclap_core::{preset_field, solve_dirichlet, BallProblem, FracParams, QuadratureSpec};

use crate::config::{Suite, SuiteConfig};
use crate::suites::run_suite;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fraclap",
    version,
    about = "Fractional Laplacian toolkit and verification harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate (-Δ)^s of a preset field at a point.
    Eval(EvalArgs),
    /// Solve the exterior Dirichlet problem in a ball at a point.
    Solve(SolveArgs),
    /// Gagliardo seminorm of a preset field on a ball.
    Seminorm(SeminormArgs),
    /// Run a verification suite and write its report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub preset: String,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub s: f64,
    /// Comma-separated coordinates.
    #[arg(long)]
    pub point: String,
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub preset_exterior: String,
    #[arg(long)]
    pub point: String,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Also estimate by walk-on-spheres with this many samples.
    #[arg(long)]
    pub mc: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SeminormArgs {
    #[arg(long)]
    pub preset: String,
    /// Radius of the ball.
    #[arg(long)]
    pub domain: f64,
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report path; the CSV table goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Comma-separated grid of orders s; pass an empty string for none.
    #[arg(long)]
    pub orders: Option<String>,
    /// Comma-separated preset names.
    #[arg(long)]
    pub presets: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
}

/// Parses and runs a command line; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Eval(a) => eval(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Seminorm(a) => seminorm(a, out),
        Command::Verify(a) => verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Config(e)) => {
            let _ = writeln!(err, "configuration error: {e:#}");
            EXIT_CONFIG
        }
        Err(CliError::Failed(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAIL
        }
    }
}

enum CliError {
    Config(anyhow::Error),
    Failed(anyhow::Error),
}

fn config_err(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Config(e.into())
}

fn failed(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Failed(e.into())
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .with_context(|| format!("{t:?} is not a number"))
        })
        .collect()
}

fn parse_point(text: &str, dim: Option<usize>) -> Result<Vec<f64>> {
    let x = parse_list(text)?;
    if let Some(d) = dim {
        if x.len() != d {
            bail!("point {text:?} has {} coordinates, expected {d}", x.len());
        }
    }
    if x.is_empty() {
        bail!("empty point");
    }
    Ok(x)
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let u = preset_field(&a.preset).map_err(config_err)?;
    let params = FracParams::new(a.dim, a.s).map_err(config_err)?;
    let x = parse_point(&a.point, Some(a.dim)).map_err(config_err)?;
    let mut spec = QuadratureSpec::default();
    if let Some(r) = a.rel_tol {
        spec = spec.with_tolerance(r, spec.abs_tol);
    }
    spec.validate().map_err(config_err)?;
    let r = frac_laplacian(&u, &x, &params, &spec).map_err(failed)?;
    writeln!(out, "{} ± {:e}", r.value, r.err_est).map_err(failed)?;
    Ok(EXIT_PASS)
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let h = preset_field(&a.preset_exterior).map_err(config_err)?;
    let x = parse_point(&a.point, a.dim).map_err(config_err)?;
    let params = FracParams::new(x.len(), a.s).map_err(config_err)?;
    let prob = BallProblem::new(a.rho, h, params, QuadratureSpec::default()).map_err(config_err)?;
    let u = solve_dirichlet(&prob, &x).map_err(failed)?;
    writeln!(out, "quadrature: {} ± {:e}", u.value, u.err_est).map_err(failed)?;
    if let Some(n) = a.mc {
        let w = wos_solve(&prob, &x, n, a.seed).map_err(failed)?;
        writeln!(
            out,
            "walk-on-spheres: {} ± {:e} ({} samples)",
            w.mean, w.stderr, w.samples
        )
        .map_err(failed)?;
    }
    Ok(EXIT_PASS)
}

fn seminorm(a: SeminormArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let u = preset_field(&a.preset).map_err(config_err)?;
    let params = FracParams::new(a.dim, a.s).map_err(config_err)?;
    let mut spec = QuadratureSpec::monte_carlo()
        .with_samples(32_000_000)
        .with_seed(a.seed);
    if let Some(n) = a.samples {
        spec = spec.with_samples(n);
    }
    spec.validate().map_err(config_err)?;
    let r = gagliardo_seminorm(&u, &params, a.domain, a.p, &spec).map_err(|e| match e {
        fraclap_core::Error::Domain(_) | fraclap_core::Error::Singularity { .. } => config_err(e),
        e => failed(e),
    })?;
    writeln!(out, "{} ± {:e}", r.value, r.stderr).map_err(failed)?;
    Ok(EXIT_PASS)
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<u8, CliError> {
    let suite: Suite = a.suite.parse().map_err(config_err)?;
    let mut cfg = match &a.config {
        Some(path) => SuiteConfig::load(path).map_err(config_err)?,
        None => SuiteConfig::new(suite),
    };
    if cfg.suite != suite {
        return Err(config_err(anyhow::anyhow!(
            "configuration is for suite {} but {} was requested",
            cfg.suite,
            suite
        )));
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(d) = a.dim {
        cfg.dim = d;
    }
    if let Some(o) = &a.orders {
        cfg.orders = parse_list(o).map_err(config_err)?;
    }
    if let Some(p) = &a.presets {
        cfg.presets = p
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
    }
    if let Some(t) = a.tolerance {
        cfg.tolerance = Some(t);
    }
    if let Some(n) = a.points {
        cfg.points = n;
    }
    if let Some(r) = a.rho {
        cfg.rho = r;
    }
    if let Some(o) = &a.out {
        cfg.output = Some(o.clone());
    }
    let report = run_suite(&cfg).map_err(config_err)?;
    let path = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("report.json"));
    report.write(&path).map_err(failed)?;
    writeln!(
        out,
        "{}: {} of {} checks passed; report written to {}",
        suite,
        report.summary.passed,
        report.summary.total,
        path.display()
    )
    .map_err(failed)?;
    for r in report.records.iter().filter(|r| !r.pass) {
        let why = r.diagnostic.clone().unwrap_or_else(|| {
            format!(
                "value {:?}, oracle {:?}, tolerance {:?}",
                r.value, r.oracle, r.tol
            )
        });
        writeln!(out, "  FAIL {}: {why}", r.id).map_err(failed)?;
    }
    Ok(if report.all_passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_points() {
        assert_eq!(parse_list("0.25, 0.5,0.75").unwrap(), vec![0.25, 0.5, 0.75]);
        assert!(parse_list("").unwrap().is_empty());
        assert!(parse_list("a").is_err());
        assert!(parse_point("0,0", Some(3)).is_err());
        assert_eq!(parse_point("1,-2", None).unwrap(), vec![1.0, -2.0]);
    }
}

//! Command-line driver.
//!
//! Every flag can also be set through an environment variable with the `ESG_RH_` prefix
//! (`ESG_RH_CONFIG`, `ESG_RH_OUT`, `ESG_RH_THREADS`, `ESG_RH_BACKEND`); flags win.
//!
//! Exit codes: 0 success, 1 verification failed, 2 configuration or parse error,
//! 3 domain or region error, 4 solver failure.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::config::{OutputFormat, RunConfig};
use crate::contour::ContourDiscretization;
use crate::error::{Error, Result};
use crate::linearizable::{g_fn, HQuadrature, LinearizableSpectrum};
use crate::output::{self, RunMetadata, SpectralRow};
use crate::reconstruct::{field_sweep, SolutionField};
use crate::rh::Backend;
use crate::verify::{linear_oracle, verification_report, Tolerances, VerificationReport};
use crate::volterra::{spectral_functions, VolterraConfig};
use crate::PhysicalPoint;

#[derive(Debug, Parser)]
#[command(name = "esg-rh", version, about = "Elliptic sine-Gordon on a semistrip via a Riemann-Hilbert problem")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML); built-in defaults when omitted.
    #[arg(long, global = true, env = "ESG_RH_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true, env = "ESG_RH_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads for the field sweep.
    #[arg(long, global = true, env = "ESG_RH_THREADS")]
    pub threads: Option<usize>,
    /// Linear solver for the discretized RH problem; overrides `solver.backend`.
    #[arg(long, global = true, env = "ESG_RH_BACKEND")]
    pub backend: Option<Backend>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral functions a, b of sampled boundary traces.
    Spectral {
        /// CSV with columns side,node,dirichlet,neumann.
        #[arg(long)]
        data: PathBuf,
        /// Sample point `re,im`; repeat for more. A default set is used when omitted.
        #[arg(long = "lambda", value_parser = parse_complex, allow_hyphen_values = true)]
        lambdas: Vec<Complex64>,
    },
    /// Solve on the configured grid, write the field and verify it.
    Solve,
    /// Evaluate the linearized series solution on the configured grid.
    Oracle,
    /// Re-run the checks on an existing field file.
    Verify {
        /// Field CSV written by `solve`.
        #[arg(long)]
        field: PathBuf,
    },
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected re,im, got {s:?}"))?;
    let re: f64 = re.trim().parse().map_err(|_| format!("bad real part in {s:?}"))?;
    let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part in {s:?}"))?;
    Ok(Complex64::new(re, im))
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 1,
        }
    }
}

/// Default spectral sample set: real points of both signs and points in the upper half plane.
pub fn default_lambdas() -> Vec<Complex64> {
    let mut v = Vec::new();
    for r in [0.25, 0.5, 1.0, 2.0, 4.0] {
        v.push(Complex64::new(r, 0.0));
        v.push(Complex64::new(-r, 0.0));
    }
    for r in [0.5, 1.0, 2.0] {
        for k in 1..=3 {
            v.push(Complex64::from_polar(r, k as f64 * std::f64::consts::FRAC_PI_4));
        }
    }
    v
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.directory = out.clone();
    }
    if let Some(b) = cli.backend {
        cfg.solver.backend = b;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the parsed command.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = load_config(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Spectral { data, lambdas } => cmd_spectral(&cfg, data, lambdas),
        Command::Solve => cmd_solve(&cfg),
        Command::Oracle => cmd_oracle(&cfg),
        Command::Verify { field } => cmd_verify(&cfg, field),
    })
}

fn cmd_spectral(cfg: &RunConfig, data: &Path, lambdas: &[Complex64]) -> Result<Outcome> {
    let params = cfg.problem()?;
    let sides = output::read_boundary_csv(data)?;
    let lambdas = if lambdas.is_empty() { default_lambdas() } else { lambdas.to_vec() };
    let vcfg = VolterraConfig::default();
    let mut rows = Vec::new();
    for side in &sides {
        for &l in &lambdas {
            let v = spectral_functions(side, l, &params, &vcfg)?;
            if let Some(t) = v.tail_warning {
                eprintln!("warning: side {} tail magnitude {t:e} at the last node", side.side().index());
            }
            rows.push(SpectralRow {
                side: side.side(),
                lambda: l,
                a: v.a,
                b: v.b,
            });
        }
    }
    let meta = RunMetadata::new("spectral", &params);
    output::write_spectral_csv(&cfg.output.directory.join("spectral.csv"), &rows, &meta)?;
    Ok(Outcome::Success)
}

fn function_table(spec: &LinearizableSpectrum) -> Result<Vec<(f64, Complex64, Complex64)>> {
    let n = 81;
    (0..n)
        .map(|i| {
            let l = 10f64.powf(-2.0 + 4.0 * i as f64 / (n - 1) as f64);
            Ok((l, g_fn(Complex64::new(l, 0.0), spec.params())?, spec.h_plus_exponent(l)?))
        })
        .collect()
}

fn finish_verification(
    cfg: &RunConfig,
    command: &str,
    field: &SolutionField,
    spec: &LinearizableSpectrum,
) -> Result<VerificationReport> {
    let report = verification_report(field, spec, &cfg.oracle_series()?, &Tolerances::default());
    let meta = RunMetadata::new(command, spec.params());
    output::write_verification_json(&cfg.output.directory.join("verification.json"), &report, &meta)?;
    for c in &report.checks {
        eprintln!(
            "{} {:<18} {:.3e} (tolerance {:.1e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    Ok(report)
}

fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.problem()?;
    let spec = LinearizableSpectrum::new(params, HQuadrature::default())?;
    let disc = ContourDiscretization::new(&spec, cfg.contour_spec())?;
    let field = field_sweep(&cfg.grid, &disc, &params, &cfg.sweep_config())?;
    let meta = RunMetadata::new("solve", &params);
    let dir = &cfg.output.directory;
    if cfg.wants(OutputFormat::Csv) {
        output::write_field_csv(&dir.join("field.csv"), &field, &meta)?;
        output::write_function_table_csv(&dir.join("functions.csv"), &function_table(&spec)?, &meta)?;
    }
    if cfg.wants(OutputFormat::Json) {
        output::write_field_json(&dir.join("field.json"), &field, &meta)?;
        output::write_diagnostics_json(&dir.join("diagnostics.json"), &field, &meta)?;
    }
    if field.is_partial() {
        let list: Vec<String> = field
            .failures
            .iter()
            .map(|f| format!("({}, {}): {}", f.x, f.y, f.message))
            .collect();
        return Err(Error::Divergence(format!(
            "{} grid points failed: {}",
            list.len(),
            list.join("; ")
        )));
    }
    let report = finish_verification(cfg, "solve", &field, &spec)?;
    Ok(if report.all_pass() {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

fn cmd_oracle(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.problem()?;
    let oracle = cfg.oracle_series()?;
    let field = SolutionField::from_fn(params, cfg.grid.xs(), cfg.grid.ys(params.width), |x, y| {
        linear_oracle(&PhysicalPoint { x, y }, &oracle)
    });
    let meta = RunMetadata::new("oracle", &params);
    let dir = &cfg.output.directory;
    if cfg.wants(OutputFormat::Csv) {
        output::write_field_csv(&dir.join("oracle.csv"), &field, &meta)?;
    }
    if cfg.wants(OutputFormat::Json) {
        output::write_field_json(&dir.join("oracle.json"), &field, &meta)?;
    }
    Ok(Outcome::Success)
}

fn cmd_verify(cfg: &RunConfig, field_path: &Path) -> Result<Outcome> {
    let params = cfg.problem()?;
    let field = output::read_field_csv(field_path, params)?;
    let spec = LinearizableSpectrum::new(params, HQuadrature::default())?;
    let report = finish_verification(cfg, "verify", &field, &spec)?;
    Ok(if report.all_pass() {
        Outcome::Success
    } else {
        Outcome::VerificationFailed
    })
}

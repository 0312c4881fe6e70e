use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use quadsurf::certificates::{self, CertificateReport};
use quadsurf::config::RunConfig;
use quadsurf::io::{write_boundary_csv, write_field, write_json};
use quadsurf::oracle;
use quadsurf::shapeopt::{initial_level_set, Descent, Problem, SolveReport, Status};

#[derive(Parser)]
#[command(name = "quadsurf", version, about = "Free-boundary solvers and existence certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shape descent for the quadrature-surface problem.
    SolveQs(SolveArgs),
    /// Shape descent for the bi-Laplacian cascade problem.
    SolveBilap {
        #[command(flatten)]
        args: SolveArgs,
        /// Use the `∫ g^2` form of the functional.
        #[arg(long)]
        g_squared: bool,
    },
    /// Evaluate every certificate on the support hull.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Radial reference values.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `outputs.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Balancing radius for `f = c χ(B_a)`, `g = k |x|^alpha`.
    RadialQs {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
    },
    /// Radial Poisson profile on `B_R`.
    RadialPoisson {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        a: f64,
        #[arg(long = "R")]
        big_r: f64,
    },
    /// Product datum `|u'(R) v'(R)|` of the radial cascade.
    RadialBilap {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        a: f64,
        #[arg(long = "R")]
        big_r: f64,
    },
}

#[derive(Serialize)]
struct OracleOutput {
    #[serde(rename = "R")]
    big_r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    u0: Option<f64>,
    #[serde(rename = "du_R", skip_serializing_if = "Option::is_none")]
    du_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g_star: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::SolveQs(args) => solve(&args, false, false),
        Command::SolveBilap { args, g_squared } => solve(&args, true, g_squared),
        Command::Check { config, format } => check(&config, format),
        Command::Oracle(cmd) => oracle_cmd(cmd),
    }
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Converged => 0,
        Status::MaxIters | Status::Stalled => 2,
        Status::ConstrainedAtHull => 3,
        Status::Failed => 1,
    }
}

fn solve(args: &SolveArgs, bilap: bool, g_squared: bool) -> Result<u8> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    cfg.g_squared |= g_squared;
    let problem = if bilap { Problem::Bilap { g_squared: cfg.g_squared } } else { Problem::Qs };
    let out = match &args.out {
        Some(o) => o.clone(),
        None => cfg.output_dir(),
    };
    cfg.outputs.dir = out.clone();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_json(&out.join("resolved_config.json"), &cfg)?;

    let grid = cfg.grid()?;
    let f = cfg.source()?;
    let g = cfg.g_spec()?;
    let cert = match problem {
        Problem::Qs => certificates::cert_qs_sufficient_tol(&f, &g, cfg.certificates.tol_eq)?,
        Problem::Bilap { .. } => certificates::cert_bilap_sufficient(&f, &g, grid)?,
    };
    eprintln!("{}: lhs={:.6} rhs={:.6} {}", cert.id, cert.lhs, cert.rhs, cert.verdict.as_str());
    write_json(&out.join("certificate.json"), &cert)?;

    let descent = Descent::new(problem, &f, &g, cfg.descent, grid)?;
    let init = initial_level_set(&f, &cfg.init(), grid)?;
    let every = cfg.outputs.snapshot_every;
    let mut io_error = None;
    let report = descent.run(&init, |k, _, trace| {
        if every > 0 && k % every == 0 && io_error.is_none() {
            if let Err(e) = write_boundary_csv(&out.join(format!("boundary_{k:04}.csv")), trace) {
                io_error = Some(e);
            }
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    write_outputs(&out, &report)?;
    eprintln!(
        "status={} iterations={} residual_inf={:.4} mean_radius={:.5}",
        serde_json::to_value(report.status)?.as_str().unwrap_or("?"),
        report.iterations,
        report.residual_inf,
        report.mean_radius
    );
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    Ok(status_code(report.status))
}

fn write_outputs(out: &Path, report: &SolveReport) -> Result<()> {
    write_json(&out.join("report.json"), report)?;
    if let Some(trace) = &report.trace {
        write_boundary_csv(&out.join("boundary_final.csv"), trace)?;
    }
    write_field(&out.join("phi.bin"), &report.level_set.to_field())?;
    for (name, field) in ["u", "v"].iter().zip(&report.fields) {
        write_field(&out.join(format!("{name}.bin")), field)?;
    }
    Ok(())
}

fn check(config: &Path, format: Format) -> Result<u8> {
    let cfg = RunConfig::from_path(config)?;
    let reports = certificates::evaluate_all(&cfg.source()?, &cfg.g_spec()?, cfg.grid()?, &cfg.certificates)?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&reports)?),
        Format::Csv => {
            println!("{}", CertificateReport::csv_header());
            for r in &reports {
                println!("{}", r.csv_row());
            }
        }
    }
    Ok(if certificates::any_sufficient_fires(&reports) { 0 } else { 3 })
}

fn oracle_cmd(cmd: OracleCommand) -> Result<u8> {
    let out = match cmd {
        OracleCommand::RadialQs { c, a, k, alpha } => OracleOutput {
            big_r: oracle::radial_qs_radius_power(c, a, k, alpha)?,
            u0: None,
            du_r: None,
            g_star: None,
        },
        OracleCommand::RadialPoisson { c, a, big_r } => {
            let p = oracle::radial_poisson(c, a, big_r)?;
            OracleOutput { big_r, u0: Some(p.u0()), du_r: Some(p.du_r()), g_star: None }
        }
        OracleCommand::RadialBilap { c, a, big_r } => {
            let (u, v) = oracle::radial_cascade(c, a, big_r)?;
            OracleOutput {
                big_r,
                u0: Some(u.u0()),
                du_r: Some(u.du_r()),
                g_star: Some((u.du_r() * v.du_r()).abs()),
            }
        }
    };
    println!("{}", serde_json::to_string(&out)?);
    Ok(0)
}

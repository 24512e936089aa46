//! `affcorr`: simulate scenes, compute local affine maps, validate them
//! against numerical oracles and recover surface normals, over
//! line-delimited JSON record streams.

mod commands;
mod io;

use std::io::Write;
use std::process::ExitCode;

use affcorr::{FiniteDiffConfig, Scheme, SimConfig};
use clap::{Args, Parser, Subcommand};

use crate::commands::{Tolerances, TRANSFER_TOL};
use crate::io::{open_input, open_output, Sidecar};

#[derive(Debug, Parser)]
#[command(name = "affcorr", version, about = "Affine correspondences between calibrated views")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit records for deterministic synthetic scenes.
    Simulate(SimulateArgs),
    /// Add p2, A and s to records carrying R, t, n, d, p1.
    Affine(StreamArgs),
    /// Check every record against the finite-difference and 3D-transfer oracles.
    Validate(ValidateArgs),
    /// Add n_est, d_est, residual and conditioning to records carrying R, t, p1, p2, A.
    EstimateNormal(StreamArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    scenes: u64,
    #[arg(long, default_value_t = 10)]
    points: usize,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Debug, Args)]
struct StreamArgs {
    #[arg(long = "in", default_value = "-")]
    input: String,
    #[arg(long, default_value = "-")]
    out: String,
    /// Rejected records go here; standard error when omitted.
    #[arg(long)]
    sidecar: Option<String>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long = "in", default_value = "-")]
    input: String,
    /// Report destination.
    #[arg(long, default_value = "-")]
    out: String,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long = "tol-fd", default_value_t = 1e-6)]
    tol_fd: f64,
    #[arg(long = "tol-algebraic", default_value_t = 1e-14)]
    tol_algebraic: f64,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    /// Processing stopped on a record-level error that cannot be sidecarred.
    Record(String),
}

impl Failure {
    pub fn io(msg: String) -> Self {
        Failure::Io(msg)
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Record(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("--{name} must be a positive number, got {v}")))
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = SimConfig {
                seed: args.seed,
                scenes: args.scenes,
                points_per_scene: args.points,
                ..SimConfig::default()
            };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let mut out = open_output(&args.out)?;
            commands::simulate(&cfg, &mut out)
        }
        Command::Affine(args) => {
            let input = open_input(&args.input)?;
            let sidecar = Sidecar::open(args.sidecar.as_deref())?;
            let mut out = open_output(&args.out)?;
            commands::affine(input, &mut out, sidecar)
        }
        Command::EstimateNormal(args) => {
            let input = open_input(&args.input)?;
            let sidecar = Sidecar::open(args.sidecar.as_deref())?;
            let mut out = open_output(&args.out)?;
            commands::estimate(input, &mut out, sidecar)
        }
        Command::Validate(args) => {
            let fd = FiniteDiffConfig::new(args.eps, Scheme::Central)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let tol = Tolerances {
                fd: positive("tol-fd", args.tol_fd)?,
                algebraic: positive("tol-algebraic", args.tol_algebraic)?,
                transfer: TRANSFER_TOL,
            };
            let input = open_input(&args.input)?;
            let report = commands::validate(input, &fd, &tol)?;
            let mut out = open_output(&args.out)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            writeln!(out, "{json}")
                .and_then(|_| out.flush())
                .map_err(|e| Failure::io(format!("write failed: {e}")))?;
            Ok(report.failures == 0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(failure) => {
            let msg = match &failure {
                Failure::Usage(m) | Failure::Io(m) | Failure::Record(m) => m,
            };
            eprintln!("affcorr: {msg}");
            ExitCode::from(failure.exit_code())
        }
    }
}

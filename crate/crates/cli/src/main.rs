//! `fractrunc`: command-line driver for the truncation experiments.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fractrunc::{Error, Verdict};

use commands::{InitArg, OptimizeArgs, Outcome, TheoremArg};
use config::{Format, Overrides, ParamArgs};

#[derive(Parser, Debug)]
#[command(name = "fractrunc", version, about = "Truncated fractional Hardy-Sobolev optimizers")]
struct Cli {
    /// JSON run configuration (or a bare experiment plan).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "FRACTRUNC_OUT")]
    out: Option<PathBuf>,
    /// Worker threads (defaults to available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Target relative tolerance of the quadrature.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Artifact formats to write.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Vec<Format>,
    #[command(flatten)]
    params: ParamArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the AT profile, its decay and dilation factor.
    Profile,
    /// Gagliardo seminorm of U, U_eps or U_eps,delta.
    Seminorm {
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Build the truncated family member and audit its support.
    Truncate {
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    /// Run an (eps, delta, q) sweep.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
    },
    /// Minimize the Hardy-Sobolev quotient.
    Optimize {
        #[arg(long, value_enum, default_value_t = InitArg::Hat)]
        init: InitArg,
        #[arg(long, default_value_t = 529)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-4)]
        rho_min: f64,
        #[arg(long, default_value_t = 1e7)]
        rho_max: f64,
    },
    /// Check a scaling statement along a sweep.
    Verify {
        #[arg(long, value_enum)]
        theorem: TheoremArg,
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        /// Concentration scale for the dichotomy check.
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 4,
        Error::ConstraintViolation(_)
        | Error::InvalidParams(_)
        | Error::InvalidRange(_)
        | Error::InvalidConfig(_)
        | Error::InvalidExponent(_) => 2,
        _ => 1,
    }
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let cfg = config::resolve(Overrides {
        config: cli.config.as_deref(),
        out: cli.out.clone(),
        workers: cli.workers,
        tol: cli.tol,
        formats: Some(cli.format.clone()),
        params: &cli.params,
    })?;
    if let Some(n) = cfg.workers {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut outcome = match &cli.command {
        Command::Profile => commands::profile(&cfg),
        Command::Seminorm { q, eps, delta } => commands::seminorm(&cfg, *q, *eps, *delta),
        Command::Truncate { eps, delta } => commands::truncate(&cfg, *eps, *delta),
        Command::Sweep { q } => commands::sweep(&cfg, q),
        Command::Optimize { init, nodes, rho_min, rho_max } => {
            commands::optimize(&cfg, &OptimizeArgs { init: *init, nodes: *nodes, rho_min: *rho_min, rho_max: *rho_max })
        }
        Command::Verify { theorem, q, eps } => commands::verify(&cfg, *theorem, q, *eps),
    }?;
    let artifacts = std::mem::take(&mut outcome.artifacts);
    let written = artifacts.write(&cfg.out)?;
    if !written.is_empty() {
        outcome.lines.push(format!("wrote {} file(s) to {}", written.len(), cfg.out.display()));
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            match outcome.verdict {
                Some(Verdict::Violated) => {
                    println!("verdict: violated");
                    ExitCode::from(3)
                }
                Some(v) => {
                    println!("verdict: {}", v.as_str());
                    ExitCode::SUCCESS
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            let code = exit_code(&e);
            let record = serde_json::json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code });
            eprintln!("{record}");
            ExitCode::from(code)
        }
    }
}

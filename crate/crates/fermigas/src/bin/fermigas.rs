//! Command-line entry point: wires flags and config files to the library
//! pipelines. Exit codes: 0 success, 2 infeasible schedule, 1 any other
//! error.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use fermigas::pipelines::{self, Command, RunContext};
use fermigas::FermigasError;

#[derive(Parser)]
#[command(name = "fermigas", version, about = "Dilute Fermi gas numerics")]
struct Cli {
    /// Run a full config file instead of flags (JSON, see the repo docs).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for reports and CSV outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Seed for every randomized corpus.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Rayon thread count (FERMIGAS_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Tolerance override for solver-backed pipelines.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Option<CliCommand>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Solve the zero-energy scattering problem for a potential file.
    Scatter {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value = "scatter.json")]
        out: PathBuf,
    },
    /// Dirichlet-sea energies, optionally swept up to n.
    Fermisea {
        #[arg(long)]
        n: usize,
        #[arg(long = "L")]
        box_side: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value = "fermisea.json")]
        out: PathBuf,
    },
    /// Brute-force verification of the weighted-determinant identities.
    DeterminantalCheck {
        #[arg(long, default_value = "determinantal.json")]
        out: PathBuf,
    },
    /// Soft-potential inequality certificate over a seeded corpus.
    Dyson {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        potential: PathBuf,
        #[arg(long = "R")]
        r_cutoff: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 20)]
        corpus: usize,
        #[arg(long, default_value = "dyson.json")]
        out: PathBuf,
    },
    /// Upper/lower bound sweep with error-exponent fits.
    Bounds {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_name = "LO:HI:N")]
        rho_sweep: String,
        #[arg(long)]
        a: f64,
        #[arg(long = "R0")]
        r0: f64,
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long, default_value = "bounds.json")]
        out: PathBuf,
    },
    /// Two-particle exact diagonalization against the pseudopotential.
    Oracle {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long = "L")]
        box_side: f64,
        #[arg(long)]
        cutoff: u32,
        #[arg(long, default_value = "oracle.json")]
        out: PathBuf,
    },
    /// Run a list of pipelines from a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Command {
        match c {
            CliCommand::Scatter { potential, dim, tol, out } => {
                Command::Scatter { potential, dim, tol, out }
            }
            CliCommand::Fermisea { n, box_side, dim, sweep, out } => {
                Command::Fermisea { n, box_side, dim, sweep, out }
            }
            CliCommand::DeterminantalCheck { out } => Command::DeterminantalCheck { out },
            CliCommand::Dyson { dim, potential, r_cutoff, s, eps, corpus, out } => {
                Command::Dyson { dim, potential, r_cutoff, s, eps, corpus, out }
            }
            CliCommand::Bounds { dim, rho_sweep, a, r0, constants, out } => {
                Command::Bounds { dim, rho_sweep, a, r0, constants, out }
            }
            CliCommand::Oracle { potential, box_side, cutoff, out } => {
                Command::Oracle { potential, box_side, cutoff, out }
            }
            CliCommand::Sweep { config } => Command::Sweep { config },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("FERMIGAS_THREADS").ok().and_then(|v| v.parse().ok())
    });
    let ctx = RunContext {
        out_dir: cli.out_dir.clone(),
        seed: cli.seed,
        tolerance: cli.tol,
        threads,
    };

    let command = match (cli.config, cli.command) {
        (Some(path), _) => {
            // a config file holds one command object (use `sweep` for lists)
            match std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read config {path:?}: {e}"))
                .and_then(|text| {
                    serde_json::from_str::<Command>(&text)
                        .map_err(|e| format!("malformed config {path:?}: {e}"))
                }) {
                Ok(c) => c,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(1);
                }
            }
        }
        (None, Some(c)) => c.into(),
        (None, None) => {
            eprintln!("error: no subcommand and no --config given (try --help)");
            return ExitCode::from(1);
        }
    };

    match pipelines::run(command, &ctx) {
        Ok(artifacts) => {
            println!("report: {}", artifacts.report_path.display());
            for extra in &artifacts.extra_paths {
                println!("output: {}", extra.display());
            }
            ExitCode::SUCCESS
        }
        Err(FermigasError::InfeasibleSchedule(msg)) => {
            eprintln!("infeasible schedule: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

//! `idsgame`: equilibria, price of anarchy, the message mechanism and the
//! participation analysis for interdependent security games.
//!
//! Exit codes: 0 success, 2 invalid input, 3 no convergence, 4 failed
//! certification, 5 unreadable or malformed file, 6 unknown risk family,
//! 7 output not writable.

mod commands;
mod error;
mod report;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use commands::{MechanismAction, MechanismArgs, SolveMode};
use error::CliError;
use report::Report;

#[derive(Parser)]
#[command(name = "idsgame", version, about = "Interdependent security games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Game-spec JSON document.
    #[arg(long)]
    spec: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized certification and dynamics; overrides the spec.
    #[arg(long)]
    seed: Option<u64>,
    /// Include unrounded outputs under `raw`.
    #[arg(long)]
    raw: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Social optimum, unregulated equilibrium, or both with the price of anarchy.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: SolveMode,
        /// With `--mode poa`, write the per-player `player,ne,social` table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build, check, or simulate message profiles of the mechanism.
    Mechanism {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        action: MechanismAction,
        /// Message profile to verify, or the starting point of the dynamics.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Round cap for the dynamics.
        #[arg(long)]
        rounds: Option<usize>,
        /// Step size for the dynamics.
        #[arg(long)]
        step: Option<f64>,
        /// Trajectory table for the dynamics, one row per round.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Save the constructed or final message profile.
        #[arg(long)]
        profile_out: Option<PathBuf>,
    },
    /// Participation versus opting out for the cheapest player.
    Ir {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<(spec::SpecDocument, idsgame::solvers::SolverConfig), CliError> {
    let doc = spec::read(&common.spec)?;
    let mut cfg = doc.solver.clone();
    if let Some(seed) = common.seed.or(doc.seed) {
        cfg.seed = seed;
    }
    Ok((doc, cfg))
}

fn emit(report: &Report, common: &Common, started: Instant) -> Result<(), CliError> {
    let json = report.to_json(common.raw, started.elapsed().as_secs_f64());
    let text = serde_json::to_string_pretty(&json).expect("report serializes") + "\n";
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output {
            path: path.display().to_string(),
            reason: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    let (report, common) = match &cli.command {
        Command::Solve { common, mode, csv } => {
            let (doc, cfg) = load(common)?;
            let (report, figure) = commands::solve(&doc, &cfg, *mode)?;
            if let Some(path) = csv {
                match &figure {
                    Some(fig) => fig.write_csv(path)?,
                    None => {
                        return Err(CliError::Invalid {
                            field: "--csv".into(),
                            reason: "the per-player table needs --mode poa".into(),
                        })
                    }
                }
            }
            (report, common)
        }
        Command::Mechanism {
            common,
            action,
            profile,
            rounds,
            step,
            csv,
            profile_out,
        } => {
            let (doc, mut cfg) = load(common)?;
            if let Some(r) = rounds {
                cfg.max_rounds = *r;
            }
            if let Some(s) = step {
                cfg.damping = *s;
            }
            cfg.validate().map_err(|e| CliError::Invalid {
                field: "--rounds/--step".into(),
                reason: e.to_string(),
            })?;
            let args = MechanismArgs {
                action: *action,
                profile: profile.as_deref(),
                profile_out: profile_out.clone(),
                csv: csv.clone(),
            };
            (commands::mechanism(&doc, &cfg, &args)?, common)
        }
        Command::Ir { common } => {
            let (doc, cfg) = load(common)?;
            (commands::ir(&doc, &cfg)?, common)
        }
    };
    emit(&report, common, started)?;
    match report.failure() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("idsgame: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wg_core::cli::{cmd_mesh, cmd_moments, cmd_solve, cmd_study, RunConfig};
use wg_core::Error;

#[derive(Parser)]
#[command(name = "wgfem", version, about = "Weak Galerkin Poisson solver on curved polygonal meshes")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and validate the meshes of every configured level.
    Mesh { config: PathBuf },
    /// Solve the first configured level and report its errors.
    Solve {
        config: PathBuf,
        /// Write the reduced system as `i j value` triplets followed by `b`.
        #[arg(long)]
        dump_system: Option<PathBuf>,
    },
    /// Convergence table over all configured levels.
    Study { config: PathBuf },
    /// Raw monomial moments of every element of a mesh file.
    Moments {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        degree: usize,
    },
}

fn run(args: Args) -> wg_core::Result<String> {
    match args.command {
        Command::Mesh { config } => cmd_mesh(&RunConfig::load(&config)?),
        Command::Solve { config, dump_system } => cmd_solve(&RunConfig::load(&config)?, dump_system.as_deref()),
        Command::Study { config } => cmd_study(&RunConfig::load(&config)?),
        Command::Moments { mesh, degree } => cmd_moments(&mesh, degree),
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NotConverged(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

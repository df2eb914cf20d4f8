//! `fsqkd`: capacity and optimized key-rate sweeps, gap reports and plot data.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "fsqkd", version, about = "Free-space QKD rate sweeps over range")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the sweep commands; each overrides the config file.
#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// `key = value` run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Result file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Range grid in metres: start,stop,count,log|lin.
    #[arg(long)]
    pub ranges: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Soft-pupil multimode capacity in bits/s at every range.
    Capacity {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Optimized key rate of one or more systems at every range.
    Rate {
        #[command(flatten)]
        run: RunArgs,
        /// soft_multimode | lg_ideal | lg_matrix | ogba:<centered_single|centered_2x2|one_by_two|auto> |
        /// single_fb_square. Defaults to the config's systems.
        #[arg(long)]
        system: Option<String>,
        /// Cross-talk matrix CSV for lg_matrix.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// fast | paper.
        #[arg(long)]
        seed_profile: Option<String>,
    },
    /// Per-range gap in dB of file A's rates over file B's.
    Gap {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot series (rates and optimal parameters against range) from result files.
    Plotdata {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Capacity { run } => commands::capacity(&run),
        Command::Rate {
            run,
            system,
            matrix,
            seed_profile,
        } => commands::rate(&run, system.as_deref(), matrix, seed_profile.as_deref()),
        Command::Gap { a, b, out } => commands::gap(&a, &b, out.as_deref()),
        Command::Plotdata { files, out } => commands::plotdata(&files, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

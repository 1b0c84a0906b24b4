//! `nsbox`: exact tools for two-input/two-output non-signaling boxes.

mod commands;
mod input;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    /// Invalid inputs or domain violations; exit code 2.
    Domain(String),
    /// IO or internal failures; exit code 1.
    Internal(String),
}

impl From<nsbox_core::Error> for CliError {
    fn from(e: nsbox_core::Error) -> Self {
        match e {
            nsbox_core::Error::Io(io) => CliError::Internal(io.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "nsbox",
    version,
    about = "Non-signaling boxes: wirings, distillation maps and section analysis",
    after_help = "Tables are CSV by default; pass --format json for JSON. \
                  Floats in tables carry 17 significant digits and parse back exactly."
)]
struct Cli {
    /// Output format for boxes and tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for the optional Monte Carlo sanity checks and sampled search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the CHSH value of a box (or all 8 relabeling variants).
    Chsh(commands::ChshArgs),
    /// Print a box table, or its plane coordinates with --coords.
    #[command(name = "box")]
    MakeBox(commands::BoxArgs),
    /// Compose two boxes under a wiring pair.
    Compose(commands::ComposeArgs),
    /// Apply the distillation map a number of steps.
    Map(commands::MapArgs),
    /// Iterate the distillation map, emitting one row per step.
    Trajectory(commands::TrajectoryArgs),
    /// Fixed points of the maps with eigenvalues and stability.
    #[command(name = "fixed-points")]
    FixedPoints(commands::FixedPointsArgs),
    /// Depolarize a box to its isotropic form.
    Depolarize(commands::DepolarizeArgs),
    /// Verify the box-level vs map-level identity on an eps grid.
    Verify(commands::VerifyArgs),
    /// Search deterministic two-copy wiring pairs for the best CHSH (JSON output).
    Search(commands::SearchArgs),
    /// Classify the polytope section by collapse behavior.
    Region(commands::RegionArgs),
    /// Distillation curve data; --staircase for the iteration trace.
    Fig3(commands::Fig3Args),
    /// Section map data; --curve for the quantum or one-step boundary.
    Fig4(commands::Fig4Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Chsh(args) => commands::chsh(args, cli.format),
        Command::MakeBox(args) => commands::make_box(args, cli.format),
        Command::Compose(args) => commands::compose(args, cli.format, cli.seed),
        Command::Map(args) => commands::map(args),
        Command::Trajectory(args) => commands::trajectory(args, cli.format),
        Command::FixedPoints(args) => commands::fixed_points(args, cli.format),
        Command::Depolarize(args) => commands::depolarize(args, cli.format),
        Command::Verify(args) => commands::verify(args, cli.format),
        Command::Search(args) => commands::search(args, cli.seed),
        Command::Region(args) => commands::region(args, cli.format),
        Command::Fig3(args) => commands::fig3(args, cli.format),
        Command::Fig4(args) => commands::fig4(args, cli.format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

//! `idealab`: run deciders, scores, witness checks, refuters and extractions
//! from the command line.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::output::{write_atomic, Format};

#[derive(Parser, Debug)]
#[command(name = "idealab", version, about = "Truncation experiments with ideals on countable sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Output on stdout.
    #[arg(long, value_enum, default_value_t)]
    #[serde(skip)]
    pub format: Format,
    /// Where to save the JSON report.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Seed for randomized generators.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide membership of a set in an ideal.
    Decide(commands::DecideArgs),
    /// Truncation scores along a schedule.
    Score(commands::ScoreArgs),
    /// Longest arithmetic progression in a truncation.
    Ap(commands::ApArgs),
    /// Exhaustive search for colorings without monochromatic progressions.
    VdwSearch(commands::VdwArgs),
    /// Check a map as a Katětov reduction.
    KatetovCheck(commands::KatetovArgs),
    /// Check a Bolzano-Weierstrass reduction witness.
    BwCheck(commands::BwArgs),
    /// Build a set showing a map is not a witness for Fin below J.
    Refute(commands::RefuteArgs),
    /// Extract an ideal-convergent subsequence.
    Extract(commands::ExtractArgs),
    /// Diagonal extraction for a double sequence under Fin x Fin.
    Fin2Extract(commands::Fin2Args),
    /// Re-render a saved report.
    Report(commands::ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, result) = match &cli.command {
        Command::Decide(a) => (&a.common, commands::decide(a)),
        Command::Score(a) => (&a.common, commands::score(a)),
        Command::Ap(a) => (&a.common, commands::ap(a)),
        Command::VdwSearch(a) => (&a.common, commands::vdw_search(a)),
        Command::KatetovCheck(a) => (&a.common, commands::katetov(a)),
        Command::BwCheck(a) => (&a.common, commands::bw(a)),
        Command::Refute(a) => (&a.common, commands::refute(a)),
        Command::Extract(a) => (&a.common, commands::extract(a)),
        Command::Fin2Extract(a) => (&a.common, commands::fin2(a)),
        Command::Report(a) => (&a.common, commands::report(a)),
    };
    let rerender = matches!(cli.command, Command::Report(_));
    let run = result.and_then(|report| {
        if let Some(path) = &common.out {
            write_atomic(path, &report.to_json())?;
        }
        print!("{}", report.render(common.format)?);
        Ok(report.status == "violated" && !rerender)
    });
    match run {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}

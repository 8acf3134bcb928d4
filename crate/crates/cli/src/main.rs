mod commands;
mod document;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "lipfree",
    version,
    about = "Lipschitz-free computations on finite metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Space document (JSON, matrix or dendrogram).
    #[arg(long, short)]
    input: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Metric axioms, strong triangle inequality and four-point condition.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Free norm of a finite combination of point masses.
    Norm {
        #[command(flatten)]
        common: Common,
        /// Masses as `label:value,label:value`.
        #[arg(long, allow_hyphen_values = true)]
        masses: String,
    },
    /// A function separating two points, with its certificate.
    Separate {
        #[command(flatten)]
        common: Common,
        x: String,
        y: String,
        /// Ball-indicator construction; the space must be ultrametric.
        #[arg(long, conflicts_with = "proper")]
        ultra: bool,
        /// Level-set construction for general spaces.
        #[arg(long)]
        proper: bool,
        /// Stop refining once at most this many points remain on ramps.
        #[arg(long, default_value_t = 0)]
        stop_size: usize,
    },
    /// Convergence of ball projections, as CSV.
    Project {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        masses: String,
        /// Entries `r:n`; defaults to `1/n:n` for n = 1..=8.
        #[arg(long)]
        schedule: Option<String>,
    },
    /// Quotient coordinates on dyadic pair nets and the sandwich check.
    Embed {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: f64,
        /// Function values as `label:value`; unlisted points are 0.
        #[arg(long, conflicts_with = "random", allow_hyphen_values = true)]
        function: Option<String>,
        /// Check this many random functions drawn from `--seed`.
        #[arg(long)]
        random: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("lipfree: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

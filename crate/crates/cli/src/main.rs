//! Command-line front end: generate courses, run trial batches, score
//! results, or do all three in one deterministic pipeline.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "navbench",
    about = "Deterministic 2D navigation benchmark: course generation, simulation, scoring",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate procedural course files plus a manifest.
    Generate(GenerateArgs),
    /// Run trial episodes over a directory of course files.
    Run(RunArgs),
    /// Score a results directory and write reports.
    Score(ScoreArgs),
    /// Generate, run, and score in one deterministic pipeline.
    Batch(BatchArgs),
}

#[derive(clap::Args)]
struct GenerateArgs {
    /// Number of courses to generate.
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Root seed; course i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep only courses from this path-length tercile of the batch.
    #[arg(long, value_parser = ["easy", "medium", "hard"])]
    difficulty: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    initial_fill: Option<f64>,
    #[arg(long)]
    smoothing_iterations: Option<usize>,
    #[arg(long)]
    fill_threshold: Option<usize>,
    #[arg(long)]
    clear_threshold: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    resolution: Option<f64>,
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    /// Directory of course JSON files (reads the manifest when present).
    #[arg(long)]
    worlds: PathBuf,
    /// Output directory for records and traces.
    #[arg(long)]
    out: PathBuf,
    /// Trials per course.
    #[arg(long)]
    trials: Option<u32>,
    /// Drive policy.
    #[arg(long, value_parser = ["pursuit"])]
    policy: Option<String>,
    /// Forward safety check.
    #[arg(long, value_parser = ["fi", "mpc", "none"])]
    safety: Option<String>,
    /// Parallel episode workers.
    #[arg(long)]
    jobs: Option<usize>,
    /// Root seed for trial seeding.
    #[arg(long)]
    seed: Option<u64>,
    /// Write a costmap PGM per episode.
    #[arg(long, default_value_t = false)]
    dump_costmap: bool,
    /// Print every FSM transition to stdout.
    #[arg(long, default_value_t = false)]
    fsm_log: bool,
    /// JSON config file (flags beat it, it beats built-in defaults).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long, default_value_t = false)]
    print_config: bool,
}

#[derive(clap::Args)]
struct ScoreArgs {
    /// One or more results directories (each from a `run`).
    #[arg(long, num_args = 1.., required = true)]
    results: Vec<PathBuf>,
    #[arg(long, value_parser = ["csv", "md"], default_value = "csv")]
    format: String,
    /// Where to write reports (defaults to the first results directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BatchArgs {
    /// Number of courses.
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Root seed for the whole pipeline.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long, value_parser = ["pursuit"])]
    policy: Option<String>,
    #[arg(long, value_parser = ["fi", "mpc", "none"])]
    safety: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (worlds/, results/, reports inside).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    print_config: bool,
}

fn main() {
    // Die quietly when a pipe closes (e.g. `navbench score ... | head`)
    // instead of panicking on EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Run(args) => commands::run(args),
        Command::Score(args) => commands::score(args),
        Command::Batch(args) => commands::batch(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

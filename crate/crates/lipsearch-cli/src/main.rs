//! `lipsearch`: command-line front end for the worst-case search library.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid usage or input,
//! 3 property violation (a bound the theory promises was broken),
//! 4 oracle state budget exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;

use commands::{CliError, VALIDATION};

#[derive(Parser)]
#[command(name = "lipsearch")]
#[command(about = "Worst-case sequential search over Lipschitz landscapes")]
struct Cli {
    /// Search cost per period, a decimal or p/q rational.
    #[arg(long, global = true, default_value = "0.3")]
    c: String,

    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the artifact to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the parallel suites (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the search count, stopping threshold and first location over
    /// a grid of window lengths.
    Table {
        /// Grid step for the window length column.
        #[arg(long, default_value = "0.05")]
        step: String,
    },
    /// Simulate the left-to-right policy against a quality index file.
    Run {
        /// Quality index JSON file.
        index: PathBuf,
    },
    /// Play a policy against the worst-case adversary and emit the trace
    /// with a consistent witness landscape.
    Adversary {
        /// "builtin" for the left-to-right policy, or a path to a scripted
        /// policy JSON file.
        #[arg(long, default_value = "builtin")]
        policy: String,
    },
    /// Emit the two-period stopping boundaries on a uniform x grid.
    Regions {
        /// Number of samples across [0, 1].
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Certify the closed form against the brute-force oracle.
    Verify {
        /// Location grid size (power of two).
        #[arg(long, default_value_t = 16)]
        m: u32,
        /// Quality grid size.
        #[arg(long, default_value_t = 16)]
        kz: u32,
        /// Maximum searches the discrete game allows.
        #[arg(long, default_value_t = 2)]
        depth: u32,
        /// Abort once the solver has expanded this many states.
        #[arg(long)]
        state_cap: Option<usize>,
    },
    /// Run the left-to-right policy on random landscapes and check the
    /// worst-case payoff bound on every one.
    Fuzz {
        /// Number of random landscapes.
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::new(VALIDATION, format!("thread pool: {e}")))?;
    }
    let c = commands::parse_cost(&cli.c)?;
    match cli.command {
        Command::Table { step } => commands::table(&c, &step, &cli.out),
        Command::Run { index } => commands::run_index(&c, &index, &cli.out),
        Command::Adversary { policy } => commands::adversary(&c, &policy, &cli.out),
        Command::Regions { samples } => commands::regions(&c, samples, &cli.out),
        Command::Verify { m, kz, depth, state_cap } => {
            commands::verify(&c, m, kz, depth, state_cap, &cli.out)
        }
        Command::Fuzz { n } => commands::fuzz(&c, n, cli.seed, &cli.out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

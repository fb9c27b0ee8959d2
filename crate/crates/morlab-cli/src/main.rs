//! morlab: exact analysis and reproducible experiments on tabular
//! multiobjective MDPs.
//!
//! Exit codes: 0 on success, 1 when a `reproduce` claim fails, 2 on
//! input/configuration errors.

mod commands;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "morlab", version, about = "Oracles and value-based agents for multiobjective MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate deterministic policies, compute exact values, Pareto front,
    /// convex coverage set, and the SER/ESR optima for a utility.
    Solve {
        /// Built-in name (`space_traders`, `bryce`) or environment file path
        #[arg(long)]
        env: String,
        /// `threshold:<t>[:strict]` or `linear:<w0>,<w1>,..`
        #[arg(long)]
        utility: String,
        /// Output directory for policies.csv and front.csv
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Train value-based agents over a list of seeds and report each seed's
    /// greedy policy against the exact oracle.
    Train {
        #[arg(long)]
        env: String,
        /// `tlo:<threshold>` or `linear:<w0>,<w1>,..`
        #[arg(long)]
        agent: String,
        #[arg(long, default_value_t = 200_000)]
        episodes: u64,
        /// Comma list (`1,2,3`) or inclusive range (`1..20`)
        #[arg(long, default_value = "1")]
        seeds: String,
        /// `<rate>` (constant) or `decay:<exponent>`
        #[arg(long)]
        alpha: Option<String>,
        /// `<rate>` (constant) or `anneal:<start>:<end>:<episodes>`
        #[arg(long)]
        epsilon: Option<String>,
        /// `plain` or `accrued` (defaults to the agent's requirement)
        #[arg(long)]
        conditioning: Option<String>,
        /// Initial Q vector, e.g. `1,0` for optimistic initialisation
        #[arg(long)]
        initial_q: Option<String>,
        /// Utility used for the oracle comparison (defaults to the agent's)
        #[arg(long)]
        utility: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Regenerate the bundled analysis tables (table1..table3, fig2_points,
    /// fig4_mixture) and verify every documented claim, PASS/FAIL per line.
    Reproduce {
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-check a policy's Monte Carlo estimate against its exact value.
    Evaluate {
        #[arg(long)]
        env: String,
        /// `STATE=ACTION` pairs, e.g. `A=Direct,B=Indirect`
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 10_000)]
        episodes: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a training experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { env, utility, out } => commands::solve::run(&env, &utility, &out),
        Command::Train {
            env,
            agent,
            episodes,
            seeds,
            alpha,
            epsilon,
            conditioning,
            initial_q,
            utility,
            out,
        } => commands::train::run(commands::train::Args {
            env,
            agent,
            episodes,
            seeds,
            alpha,
            epsilon,
            conditioning,
            initial_q,
            utility,
            out,
        }),
        Command::Reproduce { out } => commands::reproduce::run(&out),
        Command::Evaluate { env, policy, episodes, seed } => {
            commands::evaluate::run(&env, &policy, episodes, seed)
        }
        Command::Run { config } => commands::train::run_config(&config),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

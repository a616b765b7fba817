mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "polieq", version, about = "Optimal Nash and political equilibria of multi-player mean-payoff games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Political,
    Nash,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Owner,
    Literal,
}

#[derive(Args, Debug)]
pub struct GameArgs {
    #[arg(long)]
    pub game: PathBuf,
    /// Punishment-game solver.
    #[arg(long, default_value = "value-iteration")]
    pub solver: String,
}

#[derive(Args, Debug)]
pub struct EquilibriumArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// The beneficiary.
    #[arg(long)]
    pub dictator: String,
    #[arg(long, value_enum, default_value = "owner")]
    pub variant: VariantArg,
    /// Region search strategy.
    #[arg(long, default_value = "threshold")]
    pub search: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimal equilibrium for the dictator, or a yes/no answer with --threshold.
    Solve {
        #[command(flatten)]
        eq: EquilibriumArgs,
        /// Exit 1 unless the optimum reaches this rational.
        #[arg(long)]
        threshold: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Punishment values of every vertex.
    Values {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        player: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Streams the optimal play, one vertex per line.
    Synthesize {
        #[command(flatten)]
        eq: EquilibriumArgs,
        #[arg(long, default_value_t = 100)]
        steps: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean reward of a deviator who leaves the optimal play and is punished.
    SimulateDeviation {
        #[command(flatten)]
        eq: EquilibriumArgs,
        #[arg(long)]
        deviator: String,
        /// Step at which to deviate; chosen with --seed when omitted.
        #[arg(long, requires = "to")]
        at: Option<u64>,
        /// Vertex entered instead of the scheduled one.
        #[arg(long, requires = "at")]
        to: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gains up to this rational count as unprofitable.
        #[arg(long, default_value = "1/20")]
        tolerance: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the hardness game of a DIMACS formula.
    #[command(name = "reduce-3sat")]
    Reduce3Sat {
        #[arg(long)]
        cnf: PathBuf,
        /// Repeat literals of short clauses.
        #[arg(long)]
        pad: bool,
        #[arg(long)]
        zero_sum: bool,
        /// Add a society player with unit weights.
        #[arg(long)]
        social: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Political optimum and Nash equilibria of a matrix game.
    Bimatrix {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimises several players in order, each keeping the earlier optima.
    LexSolve {
        #[command(flatten)]
        eq: EquilibriumArgs,
        /// Comma-separated player names.
        #[arg(long, value_delimiter = ',', required = true)]
        objectives: Vec<String>,
        /// Add a society player with unit weights before solving.
        #[arg(long)]
        social: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-validates a report against its game.
    Verify {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        game: PathBuf,
        /// The report was made with `lex-solve --social`.
        #[arg(long)]
        social: bool,
    },
}

/// What a successful run found.
pub enum Outcome {
    Done,
    /// Nothing meets the request; exit 1.
    NotFound(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let echo: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(cli.command, echo) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotFound(message)) => {
            eprintln!("{message}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

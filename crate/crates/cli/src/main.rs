//! `teacup`: exact tests, optimal tasters, power and simulation for the
//! cup-tasting design, with JSON or CSV on standard output.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use teacup::Error;

#[derive(Parser)]
#[command(
    name = "teacup",
    version,
    about = "Exact tests and entropy-constrained tasters for the cup-tasting design"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Loss-class table of a design.
    Table(TableArgs),
    /// Optimal taster at an entropy level.
    Solve(SolveArgs),
    /// Exact test of one observed loss.
    Test(TestArgs),
    /// Power of a region along a grid of entropy levels.
    Power(PowerArgs),
    /// Monte Carlo replications of the experiment.
    Simulate(SimulateArgs),
    /// Entropy surface and optimal path on a small simplex.
    Figure(FigureArgs),
    /// First-order stochastic dominance between two entropy levels.
    Dominance(DominanceArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Table(_) => "table",
            Command::Solve(_) => "solve",
            Command::Test(_) => "test",
            Command::Power(_) => "power",
            Command::Simulate(_) => "simulate",
            Command::Figure(_) => "figure",
            Command::Dominance(_) => "dominance",
        }
    }
}

#[derive(Args)]
pub struct DesignArgs {
    /// Total number of cups N.
    #[arg(long)]
    pub cups: u32,
    /// Cups with tea poured first n.
    #[arg(long)]
    pub tm: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Region {
    FisherRight,
    InformationLeft,
    TwoSidedUnion,
}

impl Region {
    pub fn kind(self) -> teacup::RegionKind {
        match self {
            Region::FisherRight => teacup::RegionKind::FisherRight,
            Region::InformationLeft => teacup::RegionKind::InformationLeft,
            Region::TwoSidedUnion => teacup::RegionKind::TwoSidedUnion,
        }
    }
}

#[derive(Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("level").required(true).args(["entropy", "entropy_frac"]))]
pub struct SolveArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Entropy level h in nats.
    #[arg(long, allow_negative_numbers = true)]
    pub entropy: Option<f64>,
    /// Entropy level as a fraction of the maximum log C(N, n).
    #[arg(long, allow_negative_numbers = true)]
    pub entropy_frac: Option<f64>,
    /// Taster who maximizes expected loss instead.
    #[arg(long)]
    pub maximize: bool,
    /// Entropy residual tolerance.
    #[arg(long, default_value_t = teacup::gibbs::DEFAULT_ENTROPY_TOLERANCE)]
    pub tolerance: f64,
}

#[derive(Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Observed misclassification loss (even, 0..=2n).
    #[arg(long)]
    pub observed_loss: u32,
    #[arg(long, value_enum)]
    pub region: Region,
    /// Significance level.
    #[arg(long, default_value_t = teacup::hypothesis::DEFAULT_LEVEL)]
    pub level: f64,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("grid").args(["h_grid", "grid_points"]))]
pub struct PowerArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long, value_enum)]
    pub region: Region,
    /// Comma-separated entropy levels in nats.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub h_grid: Option<Vec<f64>>,
    /// Evenly spaced levels h̄·i/K for i = 1..=K.
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

pub const DEFAULT_GRID_POINTS: usize = 20;

#[derive(Args)]
#[command(group = clap::ArgGroup::new("taster").args(["entropy", "entropy_frac", "null"]))]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Optimal taster at this entropy level in nats.
    #[arg(long, allow_negative_numbers = true)]
    pub entropy: Option<f64>,
    /// Optimal taster at this fraction of the maximum entropy.
    #[arg(long, allow_negative_numbers = true)]
    pub entropy_frac: Option<f64>,
    /// Taster answering uniformly at random (the default).
    #[arg(long)]
    pub null: bool,
    #[arg(long, value_enum)]
    pub region: Region,
    /// Number of replications.
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism. Results do not
    /// depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args)]
pub struct FigureArgs {
    /// Simplex dimension, 2 or 3.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=3))]
    pub dimension: u32,
    /// Grid steps per simplex edge.
    #[arg(long, default_value_t = 50)]
    pub resolution: usize,
    /// Comma-separated payoff, one entry per coordinate.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub payoff: Option<Vec<f64>>,
    /// Points on the optimal path.
    #[arg(long, default_value_t = 50)]
    pub path_points: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
pub struct DominanceArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Lower entropy level in nats.
    #[arg(long, allow_negative_numbers = true)]
    pub h_low: f64,
    /// Higher entropy level in nats.
    #[arg(long, allow_negative_numbers = true)]
    pub h_high: f64,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            output::print_error("", "usage", e.render().to_string().trim_end());
            return ExitCode::from(1);
        }
    };
    let name = cli.command.name();
    let result = match &cli.command {
        Command::Table(a) => commands::table(a),
        Command::Solve(a) => commands::solve(a),
        Command::Test(a) => commands::test(a),
        Command::Power(a) => commands::power(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Figure(a) => commands::figure(a),
        Command::Dominance(a) => commands::dominance(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            output::print_error(name, e.kind(), &e.to_string());
            ExitCode::from(exit_code(&e))
        }
    }
}

//! `cournot`: simulate best-response dynamics, compute equilibria and
//! oscillations, verify quantity matrices and run conformance sweeps.
//!
//! Exit codes: 0 ok, 2 malformed input, 3 dimension mismatch, 4 requested
//! shape infeasible, 5 verification failed.

mod input;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cournot_core::dynamics::{DEFAULT_EPS, DEFAULT_MAX_PERIOD, DEFAULT_MAX_STEPS};
use cournot_core::format::{sig17_vec, Sig17};
use cournot_core::propcheck::{self, ConformanceReport, CostDistribution, Mutation, SweepConfig};
use cournot_core::reduction::{estimate_n_bar, reduce_window, surviving_suffix};
use cournot_core::{
    construct_case1, construct_case2, construct_case3, find_all_oscillations, nash_equilibrium,
    simulate, verify_quantity_matrix, Classifier, GameParams, ModelError, Oscillation,
    OscillationError, OscillationReport, QuantityVector, ReductionError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use input::{load_game, load_matrix, Game};
use output::{EquilibriumJson, OscillationReportJson, OutcomeJson, ReduceJson, VerifyJson};

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Malformed(String),
    #[error("{0}")]
    Dimension(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Malformed(_) => 2,
            Failure::Dimension(_) => 3,
            Failure::Infeasible(_) => 4,
            Failure::Verification(_) => 5,
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::DimensionMismatch { .. } => Failure::Dimension(e.to_string()),
            _ => Failure::Malformed(e.to_string()),
        }
    }
}

impl From<OscillationError> for Failure {
    fn from(e: OscillationError) -> Self {
        match e {
            OscillationError::Model(m) => m.into(),
            OscillationError::InvalidShape(_) => Failure::Malformed(e.to_string()),
            _ => Failure::Infeasible(e.to_string()),
        }
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::InvalidSize { .. } | ReductionError::InvalidWindow { .. } => {
                Failure::Malformed(e.to_string())
            }
            _ => Failure::Infeasible(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cournot",
    version,
    about = "Best-response dynamics of linear Cournot oligopolies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the dynamics, write the trajectory as CSV and classify it.
    Simulate(SimulateArgs),
    /// Nash equilibrium of the game.
    Equilibrium(GameArgs),
    /// Every two-period oscillation, or one requested shape.
    Oscillations(OscillationArgs),
    /// Check that a quantity matrix cycles under the update.
    Verify(VerifyArgs),
    /// Randomised property sweep.
    Sweep(SweepArgs),
    /// Search simulation snapshots for cycles longer than two.
    Falsify(SweepArgs),
    /// Average the cheapest surviving firms and check the averaged run.
    Reduce(ReduceArgs),
}

#[derive(Debug, Args)]
struct GameArgs {
    /// Game JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Write JSON here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Seed for the start vector when the game file has no `init`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_PERIOD)]
    max_period: usize,
    /// Write the outcome JSON here. Without it the outcome goes to standard
    /// output when the CSV goes to a file, and to standard error otherwise.
    #[arg(long)]
    outcome: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OscillationArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    case: Option<u8>,
    #[arg(long, requires = "case")]
    k1: Option<usize>,
    #[arg(long, requires = "case")]
    k2: Option<usize>,
    #[arg(long, requires = "case")]
    delta_a: Option<f64>,
    /// Residual bound for re-verifying each result before it is written.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    game: GameArgs,
    /// `{"rows": [[...], ...]}` in the caller's firm order.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MutationArg {
    None,
    NoClamp,
    WrongSlope,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    a_min: f64,
    #[arg(long, default_value_t = 100.0)]
    a_max: f64,
    /// Draw `A` from these values instead of the range.
    #[arg(long, value_delimiter = ',')]
    a_choices: Vec<f64>,
    /// Draw costs from multiples of this step instead of uniformly.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Give every firm the same cost.
    #[arg(long)]
    equal_costs: bool,
    /// Share of trials with every cost at or above `A`.
    #[arg(long, default_value_t = 0.0)]
    degenerate_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_PERIOD)]
    max_period: usize,
    /// Run a deliberately broken update rule.
    #[arg(long, value_enum, default_value_t = MutationArg::None, hide = true)]
    mutation: MutationArg,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Number of cheapest firms to average; estimated from the run if absent.
    #[arg(long)]
    n_bar: Option<usize>,
    /// First round of the window; defaults to the start of the longest
    /// suffix in which all averaged firms produce.
    #[arg(long)]
    window_start: Option<usize>,
    /// One past the last round of the window; defaults to the end of the run.
    #[arg(long)]
    window_end: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Equilibrium(args) => cmd_equilibrium(args),
        Command::Oscillations(args) => cmd_oscillations(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args, false),
        Command::Falsify(args) => cmd_sweep(args, true),
        Command::Reduce(args) => cmd_reduce(args),
    }
}

fn io_failure(path: Option<&Path>, e: io::Error) -> Failure {
    match path {
        Some(p) => Failure::Malformed(format!("{}: {e}", p.display())),
        None => Failure::Malformed(e.to_string()),
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| io_failure(Some(p), e))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(mut out: impl Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Malformed(e.to_string()))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| io_failure(None, e))
}

fn emit<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    write_json(sink(path)?, value)
}

/// The game file's `init`, or a seeded draw uniform on `[0, A/2]` per firm.
fn start_vector(game: &Game, seed: u64) -> Result<QuantityVector, Failure> {
    if let Some(init) = &game.init {
        return Ok(init.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = game.params.capacity() / 2.0;
    let user: Vec<f64> = (0..game.params.n())
        .map(|_| rng.gen_range(0.0..=half))
        .collect();
    Ok(QuantityVector::new(game.params.from_user_order(&user))?)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let game = load_game(&args.game.input)?;
    let q0 = start_vector(&game, args.run.seed)?;
    if args.max_period == 0 || args.run.eps.is_nan() || args.run.eps <= 0.0 {
        return Err(Failure::Malformed(
            "--max-period must be positive and --eps greater than 0".into(),
        ));
    }
    let classifier = Classifier {
        max_steps: args.run.steps,
        eps: args.run.eps,
        max_period: args.max_period,
    };
    let traj = simulate(&game.params, &q0, args.run.steps)?;
    let outcome = classifier
        .classify_trajectory(&traj)
        .map_err(|e| Failure::Malformed(e.to_string()))?;

    let csv_path = args.game.output.as_deref();
    let mut csv = sink(csv_path)?;
    traj.write_csv(&mut csv)
        .and_then(|_| csv.flush())
        .map_err(|e| io_failure(csv_path, e))?;
    drop(csv);

    let outcome = OutcomeJson::new(&game.params, &outcome);
    match (&args.outcome, csv_path) {
        (Some(path), _) => emit(Some(path), &outcome),
        (None, Some(_)) => emit(None, &outcome),
        (None, None) => write_json(io::stderr().lock(), &outcome),
    }
}

fn cmd_equilibrium(args: GameArgs) -> Result<(), Failure> {
    let game = load_game(&args.input)?;
    let eq = nash_equilibrium(&game.params);
    emit(
        args.output.as_deref(),
        &EquilibriumJson::new(&game.params, &eq, game.names.as_deref()),
    )
}

fn requested(
    params: &GameParams,
    args: &OscillationArgs,
    case: u8,
) -> Result<Oscillation, Failure> {
    let shape = |name: &str| Failure::Malformed(format!("--{name} is not used by case {case}"));
    match case {
        1 => {
            if args.k1.is_some() || args.k2.is_some() {
                return Err(shape("k1/--k2"));
            }
            if args.delta_a.is_some() {
                return Err(shape("delta-a"));
            }
            Ok(construct_case1(params)?)
        }
        2 => {
            if args.delta_a.is_some() {
                return Err(shape("delta-a"));
            }
            let (Some(k1), Some(k2)) = (args.k1, args.k2) else {
                return Err(Failure::Malformed("case 2 needs --k1 and --k2".into()));
            };
            Ok(construct_case2(params, k1, k2)?)
        }
        _ => {
            if args.k1.is_some() || args.k2.is_some() {
                return Err(shape("k1/--k2"));
            }
            Ok(construct_case3(params, args.delta_a)?)
        }
    }
}

fn cmd_oscillations(args: OscillationArgs) -> Result<(), Failure> {
    let game = load_game(&args.game.input)?;
    let params = &game.params;
    let mut report = find_all_oscillations(params);
    if let Some(case) = args.case {
        report = OscillationReport {
            oscillations: vec![requested(params, &args, case)?],
            ..report
        };
    }
    let tol = args.tol * params.capacity().max(1.0);
    let verified = |o: &Oscillation| {
        verify_quantity_matrix(params, &o.matrix, tol)
            .map(|r| r.valid)
            .unwrap_or(false)
    };
    let json = OscillationReportJson::new(params, &report, verified, game.names.as_deref());
    emit(args.game.output.as_deref(), &json)?;
    if json.oscillations.iter().any(|o| !o.verified) {
        return Err(Failure::Verification(
            "a constructed oscillation failed re-verification".into(),
        ));
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let game = load_game(&args.game.input)?;
    let matrix = load_matrix(&args.matrix, &game.params)?;
    let report = verify_quantity_matrix(&game.params, &matrix, args.tol)?;
    let json = VerifyJson::new(&game.params, &report);
    emit(args.game.output.as_deref(), &json)?;
    if report.valid {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "worst residual {} at row {}, firm {}",
            report.max_residual, json.worst.row, json.worst.firm
        )))
    }
}

fn sweep_config(args: &SweepArgs) -> SweepConfig {
    SweepConfig {
        trials: args.trials,
        n_min: args.n_min,
        n_max: args.n_max,
        capacity_min: args.a_min,
        capacity_max: args.a_max,
        capacity_choices: args.a_choices.clone(),
        costs: if args.grid_step.is_some() {
            CostDistribution::Grid
        } else {
            CostDistribution::Uniform
        },
        cost_step: args.grid_step.unwrap_or(1.0),
        equal_costs: args.equal_costs,
        degenerate_fraction: args.degenerate_fraction,
        max_steps: args.steps,
        eps: args.eps,
        max_period: args.max_period,
        seed: args.seed,
        mutation: match args.mutation {
            MutationArg::None => Mutation::None,
            MutationArg::NoClamp => Mutation::NoClamp,
            MutationArg::WrongSlope => Mutation::WrongSlope,
        },
    }
}

fn cmd_sweep(args: SweepArgs, falsify: bool) -> Result<(), Failure> {
    let config = sweep_config(&args);
    let report: ConformanceReport = if falsify {
        propcheck::falsify_long_cycles(&config)
    } else {
        propcheck::run_sweep(&config)
    }
    .map_err(Failure::Malformed)?;
    emit(args.report.as_deref(), &report)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{} property checks failed over {} trials",
            report.total_failures, report.trials
        )))
    }
}

fn cmd_reduce(args: ReduceArgs) -> Result<(), Failure> {
    let game = load_game(&args.game.input)?;
    let q0 = start_vector(&game, args.run.seed)?;
    let traj = simulate(&game.params, &q0, args.run.steps)?;
    let n_bar = match args.n_bar {
        Some(n_bar) => n_bar,
        None => match estimate_n_bar(&traj, args.run.eps) {
            0 => {
                return Err(Failure::Infeasible(
                    "no firm survives the trailing half of the run".into(),
                ))
            }
            n_bar => n_bar,
        },
    };
    if n_bar == 0 || n_bar > game.params.n() {
        return Err(ReductionError::InvalidSize {
            n_bar,
            n: game.params.n(),
        }
        .into());
    }
    let start = args
        .window_start
        .unwrap_or_else(|| surviving_suffix(&traj, n_bar));
    let end = args.window_end.unwrap_or(traj.len());
    if args.window_start.is_none() && start >= end {
        return Err(Failure::Infeasible(format!(
            "the {n_bar} cheapest firms do not all produce at the end of the run"
        )));
    }
    let reduced = reduce_window(&traj, n_bar, start..end)?;
    let json = ReduceJson {
        n_bar,
        reduced_costs: sig17_vec(&reduced.params().user_costs()),
        window: [start as u64, end as u64],
        max_residual: Sig17(reduced.update_residual()),
    };
    emit(args.game.output.as_deref(), &json)
}

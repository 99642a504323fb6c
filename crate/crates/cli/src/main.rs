//! `nhqsl`: bound sweeps, trajectory sampling and model export.

mod input;
mod sweep;
mod trajectory;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Result};
use clap::{Args, Parser, Subcommand};
use nhqsl::bounds::EnsembleSpec;
use nhqsl::propagation::TrajectorySettings;
use nhqsl::schema::ModelKind;

use input::{load_model, parse_observable, parse_state, LoadedModel, Params};
use sweep::{Group, SweepConfig};

#[derive(Parser)]
#[command(
    name = "nhqsl",
    version,
    about = "Quantum speed limits and uncertainty relations for non-Hermitian and open systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate bounds over a time grid; exits 1 if any applicable bound is violated.
    Check(CheckArgs),
    /// Sample quantum-jump trajectories and compare with the master equation.
    Trajectory(TrajectoryArgs),
    /// Build a builtin model and emit it as JSON.
    Models(ModelsArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// `builtin:<name>?k=v&...` or a model JSON file.
    #[arg(long)]
    model: String,
    /// Initial state spec (`model`, `plus`, `basis:k`, `diag:..`, `random-pure:seed`, ...).
    #[arg(long, default_value = "model")]
    state: String,
}

#[derive(Args)]
struct SamplingArgs {
    /// Number of trajectories.
    #[arg(long, default_value_t = 1000)]
    n_traj: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest trajectory time step.
    #[arg(long, default_value_t = 1e-2)]
    dt_max: f64,
    /// Largest jump probability per trajectory step.
    #[arg(long, default_value_t = 1e-3)]
    max_jump_prob: f64,
}

impl SamplingArgs {
    fn settings(&self) -> TrajectorySettings {
        TrajectorySettings { dt_max: self.dt_max, max_jump_probability: self.max_jump_prob, sample_interval: None }
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated groups: ml, mt, ml-open, mt-open, classical.
    /// Defaults depend on the model kind.
    #[arg(long)]
    bounds: Option<String>,
    /// Final time of the grid `t_final k / steps`, `k = 1..steps`.
    #[arg(long, default_value_t = 1.0)]
    t_final: f64,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Start of a single window (with --tau2).
    #[arg(long, requires = "tau2")]
    tau1: Option<f64>,
    /// End of a single window; replaces the grid.
    #[arg(long)]
    tau2: Option<f64>,
    /// Observable for uncertainty relations (`pauli:z`, `diag:..`, `jump-count`, ...).
    #[arg(long)]
    observable: Option<String>,
    /// Simpson panels for time integrals.
    #[arg(long, default_value_t = 400)]
    panels: usize,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// JSON summary path.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    t_final: f64,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// CSV output path, one row per trajectory.
    #[arg(long)]
    out: PathBuf,
    /// JSON summary path.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ModelsArgs {
    /// Builtin name; omit to list builtins.
    name: Option<String>,
    /// Parameters as `k=v`.
    params: Vec<String>,
    /// Output path; stdout if omitted.
    #[arg(long)]
    emit: Option<PathBuf>,
}

fn resolve(args: &ModelArgs) -> Result<(LoadedModel, nhqsl::schema::InitialState)> {
    let loaded = load_model(&args.model)?;
    let state = parse_state(&args.state, loaded.model.dim(), loaded.initial.as_ref(), &loaded.model)?;
    Ok((loaded, state))
}

fn check(args: CheckArgs) -> Result<bool> {
    let (loaded, state) = resolve(&args.model)?;
    let default_groups = match loaded.model.kind() {
        ModelKind::Nonhermitian => "ml,mt",
        ModelKind::Lindblad => "ml-open,mt-open",
        ModelKind::Classical => "classical,ml-open",
    };
    let groups = Group::parse_list(args.bounds.as_deref().unwrap_or(default_groups))?;
    let points = match args.tau2 {
        Some(tau2) => sweep::window(args.tau1.unwrap_or(0.0), tau2)?,
        None => sweep::time_grid(args.t_final, args.steps)?,
    };
    ensure!(args.panels >= 2, "panels must be at least 2");
    let observable = args.observable.as_deref().map(|o| parse_observable(o, loaded.model.dim())).transpose()?;
    let trajectories = Some(EnsembleSpec {
        trajectories: args.sampling.n_traj,
        seed: args.sampling.seed,
        settings: args.sampling.settings(),
    });
    let config =
        SweepConfig { model: loaded.model, state, groups, points, observable, panels: args.panels, trajectories };
    let summary = sweep::run_sweep(&config)?;
    sweep::write_csv(&args.out, &summary)?;
    if let Some(path) = &args.summary {
        sweep::write_json(path, &summary)?;
    }
    eprintln!(
        "{} rows, {} applicable, {} errors, {} violations",
        summary.rows, summary.applicable, summary.errors, summary.violations
    );
    Ok(summary.passed)
}

fn sample(args: TrajectoryArgs) -> Result<bool> {
    let (loaded, state) = resolve(&args.model)?;
    let model = trajectory::lindblad_of(&loaded.model)?;
    let psi0 = trajectory::pure_vector(&state)?;
    let s = &args.sampling;
    let (trajectories, report) = trajectory::run(&model, &psi0, args.t_final, s.n_traj, s.seed, &s.settings())?;
    trajectory::write_csv(&args.out, &trajectories)?;
    if let Some(path) = &args.summary {
        sweep::write_json(path, &report)?;
    }
    eprintln!(
        "jump mean {:.6} +- {:.6} (exact {:.6}), state deviation {:.3e}",
        report.jump_mean, report.jump_mean_standard_error, report.exact_jump_mean, report.state_max_deviation
    );
    Ok(true)
}

fn models(args: ModelsArgs) -> Result<bool> {
    let Some(name) = args.name else {
        println!("{}", input::BUILTINS.join("\n"));
        return Ok(true);
    };
    let loaded = input::builtin(&name, Params::parse(args.params.iter().map(String::as_str))?)?;
    let text = input::emit_document(&loaded)?;
    match args.emit {
        Some(path) => std::fs::write(&path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => check(a),
        Command::Trajectory(a) => sample(a),
        Command::Models(a) => models(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

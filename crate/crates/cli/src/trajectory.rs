//! `trajectory`: samples quantum-jump trajectories and compares the ensemble
//! against the exact master equation.

use std::path::Path;

use anyhow::{bail, Context, Result};
use nhqsl::linalg::max_abs;
use nhqsl::models::make_classical;
use nhqsl::propagation::{
    evolve_lindblad, jump_count_moments, sample_trajectories, summarize_ensemble, Trajectory, TrajectorySettings,
};
use nhqsl::schema::{InitialState, Model};
use nhqsl::{DensityOperator, LindbladModel, StateVector};
use serde::Serialize;

#[derive(Debug, Serialize)]
struct Row {
    trajectory: usize,
    jump_count: usize,
    jump_times: String,
    jump_channels: String,
}

#[derive(Debug, Serialize)]
pub struct TrajectoryReport {
    pub trajectories: usize,
    pub seed: u64,
    pub t_final: f64,
    pub jump_mean: f64,
    pub jump_mean_standard_error: f64,
    pub jump_variance: f64,
    pub jump_variance_standard_error: f64,
    pub exact_jump_mean: f64,
    pub exact_jump_variance: f64,
    /// Largest entrywise gap between the ensemble state and the exact state.
    pub state_max_deviation: f64,
    /// Largest entrywise standard error of the ensemble state.
    pub state_max_standard_error: f64,
}

/// Model as a Lindblad generator; classical chains are embedded.
pub fn lindblad_of(model: &Model) -> Result<LindbladModel> {
    Ok(match model {
        Model::Lindblad(m) => m.clone(),
        Model::Classical(c) => make_classical(c)?,
        Model::NonHermitian(_) => bail!("trajectory sampling needs a lindblad or classical model"),
    })
}

/// Pure initial vector; basis distributions count as pure.
pub fn pure_vector(state: &InitialState) -> Result<StateVector> {
    match state {
        InitialState::Pure(psi) => Ok(psi.clone()),
        InitialState::Distribution(p) if p.iter().filter(|&&x| x != 0.0).count() == 1 => {
            let k = p.iter().position(|&x| x != 0.0).expect("one nonzero entry");
            Ok(StateVector::basis(p.len(), k)?)
        }
        _ => bail!("trajectory sampling needs a pure initial state"),
    }
}

pub fn run(
    model: &LindbladModel,
    psi0: &StateVector,
    t_final: f64,
    n: usize,
    seed: u64,
    settings: &TrajectorySettings,
) -> Result<(Vec<Trajectory>, TrajectoryReport)> {
    let trajectories = sample_trajectories(model, psi0, t_final, n, seed, settings)?;
    let summary = summarize_ensemble(&trajectories)?;
    let rho0 = DensityOperator::from_pure(psi0)?;
    let exact = evolve_lindblad(model, &rho0, t_final)?;
    let moments = jump_count_moments(model, &rho0, t_final)?;
    let report = TrajectoryReport {
        trajectories: n,
        seed,
        t_final,
        jump_mean: summary.jump_mean,
        jump_mean_standard_error: summary.jump_mean_standard_error,
        jump_variance: summary.jump_variance,
        jump_variance_standard_error: summary.jump_variance_standard_error,
        exact_jump_mean: moments.mean,
        exact_jump_variance: moments.variance(),
        state_max_deviation: max_abs(&(&summary.mean_state - exact.matrix())),
        state_max_standard_error: summary.state_standard_error.iter().map(|z| z.re.max(z.im)).fold(0.0, f64::max),
    };
    Ok((trajectories, report))
}

pub fn write_csv(path: &Path, trajectories: &[Trajectory]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for (i, t) in trajectories.iter().enumerate() {
        let times: Vec<String> = t.jumps.iter().map(|j| j.time.to_string()).collect();
        let channels: Vec<String> = t.jumps.iter().map(|j| j.channel.to_string()).collect();
        w.serialize(Row {
            trajectory: i,
            jump_count: t.jump_count,
            jump_times: times.join(";"),
            jump_channels: channels.join(";"),
        })?;
    }
    w.flush()?;
    Ok(())
}

//! `check`: evaluates bound groups over a time grid and writes CSV + JSON.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use nhqsl::bounds::{self, BoundKind, BoundReport, EnsembleSpec, OpenObservable, SLACK_TOL};
use nhqsl::models::make_classical;
use nhqsl::schema::{InitialState, Model};
use nhqsl::{ClassicalMarkovModel, ComplexMatrix, DensityOperator, LindbladModel, NonHermitianModel};
use rayon::prelude::*;
use serde::Serialize;

use crate::input::ObservableSpec;

/// Families of bounds selectable with `--bounds`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Ml,
    Mt,
    MlOpen,
    MtOpen,
    Classical,
}

impl Group {
    pub fn parse_list(list: &str) -> Result<Vec<Group>> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let g = match item {
                "ml" => Group::Ml,
                "mt" => Group::Mt,
                "ml-open" => Group::MlOpen,
                "mt-open" => Group::MtOpen,
                "classical" => Group::Classical,
                other => bail!("unknown bound group `{other}` (known: ml, mt, ml-open, mt-open, classical)"),
            };
            if !out.contains(&g) {
                out.push(g);
            }
        }
        ensure!(!out.is_empty(), "no bound groups selected");
        Ok(out)
    }
}

/// One evaluation time: ML and open bounds use `[0, t]`, MT bounds `[tau1, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePoint {
    pub tau1: f64,
    pub t: f64,
}

/// Strictly positive grid `t_final k / steps`, `k = 1..=steps`.
pub fn time_grid(t_final: f64, steps: usize) -> Result<Vec<TimePoint>> {
    ensure!(t_final.is_finite() && t_final > 0.0, "t-final must be positive, got {t_final}");
    ensure!(steps >= 1, "steps must be at least 1");
    Ok((1..=steps).map(|k| TimePoint { tau1: 0.0, t: t_final * k as f64 / steps as f64 }).collect())
}

/// A single window `[tau1, tau2]`.
pub fn window(tau1: f64, tau2: f64) -> Result<Vec<TimePoint>> {
    ensure!(tau1.is_finite() && tau2.is_finite() && 0.0 <= tau1 && tau1 < tau2, "window must satisfy 0 <= tau1 < tau2");
    Ok(vec![TimePoint { tau1, t: tau2 }])
}

/// Model and state in the forms the bound groups consume.
enum Target {
    Closed { model: NonHermitianModel, state: InitialState },
    Open { model: LindbladModel, rho: DensityOperator, chain: Option<ClassicalMarkovModel> },
}

pub struct SweepConfig {
    pub model: Model,
    pub state: InitialState,
    pub groups: Vec<Group>,
    pub points: Vec<TimePoint>,
    pub observable: Option<ObservableSpec>,
    pub panels: usize,
    pub trajectories: Option<EnsembleSpec>,
}

/// One CSV row.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub t: f64,
    pub bound: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub applicable: bool,
    pub cond_failures: String,
    pub quad_err: Option<f64>,
}

/// One JSON summary entry: the full report or the error that replaced it.
#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub t: f64,
    pub tau1: f64,
    pub kind: BoundKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Entry {
    fn row(&self) -> Row {
        match &self.report {
            Some(r) => Row {
                t: self.t,
                bound: r.kind.to_string(),
                lhs: r.lhs,
                rhs: r.rhs,
                slack: r.slack,
                applicable: r.applicable,
                cond_failures: r.failed_conditions().join(";"),
                quad_err: r.quad_err,
            },
            None => Row {
                t: self.t,
                bound: self.kind.to_string(),
                lhs: f64::NAN,
                rhs: f64::NAN,
                slack: f64::NAN,
                applicable: false,
                cond_failures: "error".into(),
                quad_err: None,
            },
        }
    }

    fn violated(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.violated(SLACK_TOL))
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub applicable: usize,
    pub errors: usize,
    pub violations: usize,
    pub slack_tol: f64,
    pub passed: bool,
    pub entries: Vec<Entry>,
}

fn density_of(state: &InitialState) -> Result<DensityOperator> {
    Ok(match state {
        InitialState::Pure(psi) => DensityOperator::from_pure(psi)?,
        InitialState::Mixed(rho) => rho.clone(),
        InitialState::Distribution(p) => DensityOperator::diagonal(p)?,
    })
}

fn target(config: &SweepConfig) -> Result<Target> {
    let needs_closed = config.groups.iter().any(|g| matches!(g, Group::Ml | Group::Mt));
    let needs_classical = config.groups.contains(&Group::Classical);
    Ok(match &config.model {
        Model::NonHermitian(m) => {
            ensure!(
                config.groups.iter().all(|g| matches!(g, Group::Ml | Group::Mt)),
                "nonhermitian models support only the ml and mt groups"
            );
            Target::Closed { model: m.clone(), state: config.state.clone() }
        }
        Model::Lindblad(m) => {
            ensure!(!needs_closed && !needs_classical, "lindblad models support only the ml-open and mt-open groups");
            Target::Open { model: m.clone(), rho: density_of(&config.state)?, chain: None }
        }
        Model::Classical(c) => {
            ensure!(!needs_closed, "classical models support the ml-open, mt-open and classical groups");
            let InitialState::Distribution(p) = &config.state else {
                bail!("classical models need a distribution state (e.g. diag:1,0 or model)");
            };
            let chain = ClassicalMarkovModel::new(c.rates().to_vec(), p.clone())?;
            Target::Open { model: make_classical(&chain)?, rho: chain.initial_density()?, chain: Some(chain) }
        }
    })
}

fn push(out: &mut Vec<Entry>, p: TimePoint, kinds: &[BoundKind], result: nhqsl::Result<Vec<BoundReport>>) {
    match result {
        Ok(reports) => out.extend(reports.into_iter().map(|r| Entry {
            t: p.t,
            tau1: p.tau1,
            kind: r.kind,
            report: Some(r),
            error: None,
        })),
        Err(e) => out.extend(kinds.iter().map(|&kind| Entry {
            t: p.t,
            tau1: p.tau1,
            kind,
            report: None,
            error: Some(e.to_string()),
        })),
    }
}

fn closed_point(
    model: &NonHermitianModel,
    state: &InitialState,
    groups: &[Group],
    c: Option<&ComplexMatrix>,
    panels: usize,
    p: TimePoint,
) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    let rho;
    let state_ref: nhqsl::metrics::StateRef<'_> = match state {
        InitialState::Pure(psi) => psi.into(),
        InitialState::Mixed(r) => r.into(),
        InitialState::Distribution(d) => {
            rho = DensityOperator::diagonal(d)?;
            (&rho).into()
        }
    };
    for g in groups {
        match g {
            Group::Ml => {
                push(
                    &mut out,
                    p,
                    &[BoundKind::QslMl, BoundKind::QslMlSimplified],
                    bounds::qsl_ml(model, state_ref, p.t).map(Vec::from),
                );
                if let Some(c) = c {
                    push(
                        &mut out,
                        p,
                        &[BoundKind::TurMl, BoundKind::TurMlLoose],
                        bounds::tur_ml(model, state_ref, p.t, c).map(Vec::from),
                    );
                }
            }
            Group::Mt => {
                push(
                    &mut out,
                    p,
                    &[BoundKind::QslMt],
                    bounds::qsl_mt(model, state_ref, p.tau1, p.t, panels).map(|r| vec![r]),
                );
                if let Some(c) = c {
                    push(
                        &mut out,
                        p,
                        &[BoundKind::TurMt],
                        bounds::tur_mt(model, state_ref, p.tau1, p.t, c, panels).map(|r| vec![r]),
                    );
                    let et = bounds::energy_time(model, state_ref, p.t, c, bounds::DEFAULT_FD_STEP);
                    push(&mut out, p, &[BoundKind::EnergyTime], et.map(|r| vec![r]));
                }
            }
            _ => unreachable!("validated in target()"),
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn open_point(
    model: &LindbladModel,
    rho: &DensityOperator,
    chain: Option<&ClassicalMarkovModel>,
    groups: &[Group],
    obs: Option<&ObservableSpec>,
    ensemble: Option<EnsembleSpec>,
    panels: usize,
    p: TimePoint,
) -> Result<Vec<Entry>> {
    let matrix = obs.and_then(ObservableSpec::matrix);
    let open_obs = match obs {
        None => None,
        Some(ObservableSpec::JumpCount) => Some(OpenObservable::JumpCount),
        Some(ObservableSpec::JumpCountSampled) => {
            Some(OpenObservable::JumpCountEnsemble(ensemble.expect("validated before the sweep")))
        }
        Some(_) => matrix.as_ref().map(OpenObservable::System),
    };
    let mut out = Vec::new();
    for g in groups {
        match g {
            Group::MlOpen => {
                push(&mut out, p, &[BoundKind::QslMlOpen], bounds::qsl_ml_open(model, rho, p.t).map(|r| vec![r]));
                if let Some(o) = open_obs {
                    push(&mut out, p, &[BoundKind::TurMlOpen], bounds::tur_ml_open(model, rho, p.t, o));
                }
            }
            Group::MtOpen => {
                push(
                    &mut out,
                    p,
                    &[BoundKind::QslMtOpen],
                    bounds::qsl_mt_open(model, rho, p.t, panels).map(|r| vec![r]),
                );
                if let Some(o) = open_obs {
                    push(
                        &mut out,
                        p,
                        &[BoundKind::TurMtOpen],
                        bounds::tur_mt_open(model, rho, p.t, o, panels).map(|r| vec![r]),
                    );
                }
            }
            Group::Classical => {
                let chain = chain.expect("validated in target()");
                push(
                    &mut out,
                    p,
                    &[BoundKind::ClassicalSpeedLimit],
                    bounds::classical_speed_limit(chain, p.t).map(|r| vec![r]),
                );
                if let Some(f) = obs.and_then(ObservableSpec::values) {
                    push(
                        &mut out,
                        p,
                        &[BoundKind::ClassicalTur],
                        bounds::classical_tur(chain, p.t, &f).map(|r| vec![r]),
                    );
                }
            }
            _ => unreachable!("validated in target()"),
        }
    }
    Ok(out)
}

/// Evaluates every time point (concurrently, merged in grid order).
pub fn run_sweep(config: &SweepConfig) -> Result<Summary> {
    let target = target(config)?;
    if let Some(obs) = &config.observable {
        match (&target, obs) {
            (Target::Closed { .. }, ObservableSpec::JumpCount | ObservableSpec::JumpCountSampled) => {
                bail!("jump-count observables need a lindblad or classical model")
            }
            (_, ObservableSpec::JumpCountSampled) => {
                let n = config.trajectories.map_or(0, |t| t.trajectories);
                ensure!(n >= 1, "jump-count-mc needs --n-traj >= 1");
            }
            _ => {}
        }
    }
    let matrix = config.observable.as_ref().and_then(ObservableSpec::matrix);
    let per_point: Vec<Vec<Entry>> = config
        .points
        .par_iter()
        .enumerate()
        .map(|(k, &p)| match &target {
            Target::Closed { model, state } => {
                closed_point(model, state, &config.groups, matrix.as_ref(), config.panels, p)
            }
            Target::Open { model, rho, chain } => {
                let ensemble = config.trajectories.map(|e| EnsembleSpec { seed: e.seed.wrapping_add(k as u64), ..e });
                open_point(
                    model,
                    rho,
                    chain.as_ref(),
                    &config.groups,
                    config.observable.as_ref(),
                    ensemble,
                    config.panels,
                    p,
                )
            }
        })
        .collect::<Result<_>>()?;
    let entries: Vec<Entry> = per_point.into_iter().flatten().collect();
    let applicable = entries.iter().filter(|e| e.report.as_ref().is_some_and(|r| r.applicable)).count();
    let errors = entries.iter().filter(|e| e.error.is_some()).count();
    let violations = entries.iter().filter(|e| e.violated()).count();
    Ok(Summary {
        rows: entries.len(),
        applicable,
        errors,
        violations,
        slack_tol: SLACK_TOL,
        passed: violations == 0,
        entries,
    })
}

pub fn write_csv(path: &Path, summary: &Summary) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for e in &summary.entries {
        w.serialize(e.row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_and_grids() {
        assert_eq!(Group::parse_list("ml,mt,ml").unwrap(), vec![Group::Ml, Group::Mt]);
        assert!(Group::parse_list("ml,speed").is_err());
        assert!(Group::parse_list("").is_err());
        let g = time_grid(2.0, 4).unwrap();
        assert_eq!(g.iter().map(|p| p.t).collect::<Vec<_>>(), vec![0.5, 1.0, 1.5, 2.0]);
        assert!(time_grid(0.0, 4).is_err());
        assert!(window(0.5, 0.2).is_err());
    }
}

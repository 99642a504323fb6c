//! Quantum-jump unraveling of the Lindblad equation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{normalize, Layout, StateVector};
use crate::sum::Neumaier;
use crate::{c64, ComplexMatrix, ComplexVector};

use super::LindbladModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySettings {
    /// Upper bound on the time step.
    pub dt_max: f64,
    /// Bound on the total jump probability per step, `dt |sum L^dagger L|`.
    pub max_jump_probability: f64,
    /// Store the normalized state every this much time, if set.
    pub sample_interval: Option<f64>,
}

impl Default for TrajectorySettings {
    fn default() -> Self {
        Self { dt_max: 1e-2, max_jump_probability: 1e-3, sample_interval: None }
    }
}

impl TrajectorySettings {
    fn validate(&self) -> Result<()> {
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return Err(Error::BadParameter(format!("dt_max {} must be positive", self.dt_max)));
        }
        if !(self.max_jump_probability > 0.0 && self.max_jump_probability < 1.0) {
            return Err(Error::BadParameter(format!(
                "max jump probability {} must lie in (0, 1)",
                self.max_jump_probability
            )));
        }
        if let Some(s) = self.sample_interval {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::BadParameter(format!("sample interval {s} must be positive")));
            }
        }
        Ok(())
    }

    /// Step count and uniform step for a run of length `tau`.
    pub fn grid(&self, model: &LindbladModel, tau: f64) -> Result<(usize, f64)> {
        self.validate()?;
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::BadParameter(format!("duration {tau} must be finite and nonnegative")));
        }
        if tau == 0.0 {
            return Ok((0, 0.0));
        }
        let rate = linalg::op_norm(&model.dissipation_rate_operator());
        let dt = if rate > 0.0 { self.dt_max.min(self.max_jump_probability / rate) } else { self.dt_max };
        let steps = (tau / dt).ceil().max(1.0) as usize;
        Ok((steps, tau / steps as f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub jumps: Vec<JumpEvent>,
    pub samples: Vec<(f64, StateVector)>,
    pub final_state: StateVector,
    pub jump_count: usize,
}

/// Independent stream `index` of the generator seeded with `master_seed`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// One trajectory on `[0, tau]`, using stream 0 of `seed`.
pub fn sample_trajectory(
    model: &LindbladModel,
    psi0: &StateVector,
    tau: f64,
    seed: u64,
    settings: &TrajectorySettings,
) -> Result<Trajectory> {
    sample_trajectory_with_rng(model, psi0, tau, &mut trajectory_rng(seed, 0), settings)
}

/// First-order unraveling: in a step of length `dt` channel `m` fires with
/// probability `dt |L_m psi|^2` (state `L_m psi` renormalized); otherwise the
/// state evolves under `exp(-i H_eff dt)` and is renormalized.
pub fn sample_trajectory_with_rng<R: Rng>(
    model: &LindbladModel,
    psi0: &StateVector,
    tau: f64,
    rng: &mut R,
    settings: &TrajectorySettings,
) -> Result<Trajectory> {
    if psi0.layout() != Layout::Flat || psi0.dim() != model.dim() {
        return Err(Error::Shape(format!(
            "trajectory needs a flat state of dim {}, got dim {}",
            model.dim(),
            psi0.dim()
        )));
    }
    let (steps, dt) = settings.grid(model, tau)?;
    let no_jump = linalg::expm(&(model.effective_hamiltonian() * c64(0.0, -dt)))?;
    let (mut psi, _) = normalize(psi0)?;
    let mut amps: ComplexVector = psi.amplitudes().clone();
    let mut jumps = Vec::new();
    let mut samples = Vec::new();
    let sample_every = settings.sample_interval.map(|s| ((s / dt).round() as usize).max(1));
    if sample_every.is_some() {
        samples.push((0.0, psi.clone()));
    }
    let mut candidates: Vec<ComplexVector> = Vec::with_capacity(model.channels());
    for k in 0..steps {
        candidates.clear();
        let mut weights = Vec::with_capacity(model.channels());
        for l in model.jumps() {
            let v = l * &amps;
            weights.push(dt * v.norm_squared());
            candidates.push(v);
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut fired = None;
        for (m, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                fired = Some(m);
                break;
            }
        }
        let next = match fired {
            Some(m) => {
                jumps.push(JumpEvent { time: (k + 1) as f64 * dt, channel: m });
                candidates[m].clone()
            }
            None => &no_jump * &amps,
        };
        let norm = next.norm();
        if !(norm >= crate::state::NORM_FLOOR) {
            return Err(Error::NormUnderflow { norm });
        }
        amps = next / c64(norm, 0.0);
        if let Some(every) = sample_every {
            if (k + 1) % every == 0 {
                samples.push(((k + 1) as f64 * dt, StateVector::new(amps.clone())?));
            }
        }
    }
    psi = StateVector::new(amps)?;
    Ok(Trajectory { jump_count: jumps.len(), jumps, samples, final_state: psi })
}

/// Ensemble statistics of `n` trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub trajectories: usize,
    /// Average of `|psi(tau)><psi(tau)|`.
    pub mean_state: ComplexMatrix,
    /// Standard error of the real and imaginary parts of each entry, packed
    /// as `re + i im`.
    pub state_standard_error: ComplexMatrix,
    pub jump_mean: f64,
    pub jump_variance: f64,
    pub jump_mean_standard_error: f64,
    /// Standard error of the sample variance (normal approximation).
    pub jump_variance_standard_error: f64,
}

struct Accumulator {
    first: Vec<Neumaier>,
    second: Vec<Neumaier>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self { first: vec![Neumaier::default(); len], second: vec![Neumaier::default(); len] }
    }

    fn add(&mut self, i: usize, x: f64) {
        self.first[i].add(x);
        self.second[i].add(x * x);
    }

    fn mean_and_se(&self, i: usize, n: f64) -> (f64, f64) {
        let mean = self.first[i].value() / n;
        let var = if n > 1.0 { ((self.second[i].value() - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        (mean, (var / n).sqrt())
    }
}

/// Runs `n` trajectories in parallel, trajectory `i` on stream `i` of
/// `master_seed`, returned in index order so the result does not depend on
/// the number of worker threads.
pub fn sample_trajectories(
    model: &LindbladModel,
    psi0: &StateVector,
    tau: f64,
    n: usize,
    master_seed: u64,
    settings: &TrajectorySettings,
) -> Result<Vec<Trajectory>> {
    if n == 0 {
        return Err(Error::BadParameter("ensemble needs at least one trajectory".into()));
    }
    (0..n as u64)
        .into_par_iter()
        .map(|i| sample_trajectory_with_rng(model, psi0, tau, &mut trajectory_rng(master_seed, i), settings))
        .collect()
}

/// [`sample_trajectories`] followed by [`summarize_ensemble`], without
/// keeping intermediate samples.
pub fn sample_ensemble(
    model: &LindbladModel,
    psi0: &StateVector,
    tau: f64,
    n: usize,
    master_seed: u64,
    settings: &TrajectorySettings,
) -> Result<EnsembleSummary> {
    let settings = TrajectorySettings { sample_interval: None, ..*settings };
    summarize_ensemble(&sample_trajectories(model, psi0, tau, n, master_seed, &settings)?)
}

/// Merges trajectories in order with compensated sums.
pub fn summarize_ensemble(trajectories: &[Trajectory]) -> Result<EnsembleSummary> {
    let first =
        trajectories.first().ok_or_else(|| Error::BadParameter("ensemble needs at least one trajectory".into()))?;
    let n = trajectories.len();
    let d = first.final_state.dim();
    let mut entries = Accumulator::new(2 * d * d);
    let mut counts = Accumulator::new(2);
    for t in trajectories {
        let (amps, count) = (t.final_state.amplitudes(), t.jump_count);
        for c in 0..d {
            for r in 0..d {
                let z = amps[r] * amps[c].conj();
                let idx = 2 * (c * d + r);
                entries.add(idx, z.re);
                entries.add(idx + 1, z.im);
            }
        }
        let x = count as f64;
        counts.add(0, x);
        counts.add(1, x * x);
    }
    let nf = n as f64;
    let mut mean_state = ComplexMatrix::zeros(d, d);
    let mut se = ComplexMatrix::zeros(d, d);
    for c in 0..d {
        for r in 0..d {
            let idx = 2 * (c * d + r);
            let (mr, sr) = entries.mean_and_se(idx, nf);
            let (mi, si) = entries.mean_and_se(idx + 1, nf);
            mean_state[(r, c)] = c64(mr, mi);
            se[(r, c)] = c64(sr, si);
        }
    }
    let (jump_mean, jump_mean_standard_error) = counts.mean_and_se(0, nf);
    let (second, second_se) = counts.mean_and_se(1, nf);
    let jump_variance = (second - jump_mean * jump_mean).max(0.0) * if n > 1 { nf / (nf - 1.0) } else { 1.0 };
    let jump_variance_standard_error =
        (second_se.powi(2) + (2.0 * jump_mean * jump_mean_standard_error).powi(2)).sqrt();
    Ok(EnsembleSummary {
        trajectories: n,
        mean_state,
        state_standard_error: se,
        jump_mean,
        jump_variance,
        jump_mean_standard_error,
        jump_variance_standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ComplexVector;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(v.len(), v.iter().map(|&x| c64(x, 0.0))))
    }

    #[test]
    fn no_jump_operators_give_unitary_path() {
        let h = diag(&[0.0, 1.0]);
        let model = LindbladModel::new(h.clone(), vec![]).unwrap();
        let psi0 = StateVector::uniform(2).unwrap();
        let t = sample_trajectory(&model, &psi0, 1.0, 3, &TrajectorySettings::default()).unwrap();
        assert_eq!(t.jump_count, 0);
        let u = linalg::expm(&(h * c64(0.0, -1.0))).unwrap();
        let exact = &u * psi0.amplitudes();
        assert!((t.final_state.amplitudes() - exact).norm() < 1e-12);
    }

    #[test]
    fn reproducible_and_ordered() {
        let model = LindbladModel::new(diag(&[0.0, 1.0]), vec![diag(&[1.0, -1.0]) * c64(2.0, 0.0)]).unwrap();
        let psi0 = StateVector::uniform(2).unwrap();
        let s = TrajectorySettings { sample_interval: Some(0.25), ..Default::default() };
        let a = sample_trajectory(&model, &psi0, 1.0, 11, &s).unwrap();
        let b = sample_trajectory(&model, &psi0, 1.0, 11, &s).unwrap();
        assert_eq!(a, b);
        assert!(a.jumps.windows(2).all(|w| w[0].time < w[1].time));
        assert!(a.jumps.iter().all(|j| j.time > 0.0 && j.time <= 1.0 + 1e-12));
        assert_eq!(a.samples.len(), 5);
    }

    #[test]
    fn step_respects_jump_probability_cap() {
        let model = LindbladModel::new(diag(&[0.0, 0.0]), vec![diag(&[1.0, -1.0]) * c64(10f64.sqrt(), 0.0)]).unwrap();
        let (steps, dt) = TrajectorySettings::default().grid(&model, 1.0).unwrap();
        assert!(dt * 10.0 <= 1e-3 + 1e-15);
        assert!((steps as f64 * dt - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ensemble_is_thread_count_independent() {
        let model = LindbladModel::new(diag(&[0.0, 1.0]), vec![diag(&[0.0, 1.0])]).unwrap();
        let psi0 = StateVector::uniform(2).unwrap();
        let s = TrajectorySettings::default();
        let a = sample_ensemble(&model, &psi0, 0.5, 64, 9, &s).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sample_ensemble(&model, &psi0, 0.5, 64, 9, &s).unwrap());
        assert_eq!(a, b);
    }
}

//! Pointwise intermediate inequalities behind the ML and MT bounds, exposed
//! as diagnostics so each step can be checked on its own.

use crate::error::{Error, Result};
use crate::linalg;
use crate::metrics;
use crate::metrics::StateRef;
use crate::propagation::{evolve_nonhermitian, evolve_on_grid, NonHermitianModel};
use crate::state::StateVector;
use crate::{c64, ComplexMatrix};

use super::closed::{commutator_check, initial_vector};

/// ML chain at one time `t`; each `*_lhs <= *_rhs` except the Jensen and
/// overlap steps, which read `*_lhs >= *_rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlChainPoint {
    pub t: f64,
    /// `|<psi(0)|(H - E_g)|psi(t)>|`.
    pub energy_term: f64,
    /// `<H>(0) - E_g`.
    pub energy_bound: f64,
    /// `|<psi(0)|Gamma|psi(t)>|`.
    pub decay_term: f64,
    /// `sum_j C_j gamma_j e^{-gamma_j t}`.
    pub decay_bound: f64,
    /// `sum_j C_j e^{-gamma_j t}`.
    pub jensen_lhs: f64,
    /// `e^{-t sum_j C_j gamma_j}`.
    pub jensen_rhs: f64,
    /// `|<psi(0)|psi(t)>|`.
    pub overlap: f64,
    /// `e^{-<Gamma> t} - t (<H> - E_g)`.
    pub overlap_lower: f64,
}

impl MlChainPoint {
    /// Largest violation among the four steps (nonpositive when all hold).
    pub fn max_excess(&self) -> f64 {
        [
            self.energy_term - self.energy_bound,
            self.decay_term - self.decay_bound,
            self.jensen_rhs - self.jensen_lhs,
            self.overlap_lower - self.overlap,
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates the ML chain at the given times. Left sides come from the
/// evolved vectors, right sides from the joint eigenbasis weights
/// `C_j = <e_j|rho0|e_j>`.
pub fn ml_fidelity_chain<'a>(
    model: &NonHermitianModel,
    state: impl Into<StateRef<'a>>,
    times: &[f64],
) -> Result<Vec<MlChainPoint>> {
    if model.is_time_dependent() {
        return Err(Error::TimeDependent);
    }
    let (norm, commutes) = commutator_check(model.h(), model.gamma());
    if !commutes {
        return Err(Error::CommutatorViolation { norm });
    }
    let psi0 = initial_vector(state)?;
    let rho0 = psi0.reduced()?;
    let (v, energies, decays) = linalg::joint_eigenbasis(model.h(), model.gamma())?;
    let weights: Vec<f64> = (0..v.ncols())
        .map(|j| {
            let e = v.column(j);
            (e.adjoint() * rho0.matrix() * e)[(0, 0)].re.max(0.0)
        })
        .collect();
    let e_g = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_h: f64 = weights.iter().zip(&energies).map(|(c, e)| c * e).sum();
    let mean_gamma: f64 = weights.iter().zip(&decays).map(|(c, g)| c * g).sum();
    let d = model.dim();
    let shifted = model.h() - ComplexMatrix::identity(d, d) * c64(e_g, 0.0);
    times
        .iter()
        .map(|&t| {
            let psi_t = evolve_nonhermitian(model, &psi0, t)?;
            let energy_term = psi0.inner(&psi_t.apply_local(&shifted)?).norm();
            let decay_term = psi0.inner(&psi_t.apply_local(model.gamma())?).norm();
            let decay_bound = weights.iter().zip(&decays).map(|(c, g)| c * g * (-g * t).exp()).sum();
            let jensen_lhs = weights.iter().zip(&decays).map(|(c, g)| c * (-g * t).exp()).sum();
            Ok(MlChainPoint {
                t,
                energy_term,
                energy_bound: mean_h - e_g,
                decay_term,
                decay_bound,
                jensen_lhs,
                jensen_rhs: (-t * mean_gamma).exp(),
                overlap: psi0.inner(&psi_t).norm(),
                overlap_lower: (-mean_gamma * t).exp() - t * (mean_h - e_g),
            })
        })
        .collect()
}

/// MT chain sample at one grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct MtChainPoint {
    pub t: f64,
    /// `|(H_nh - <H_nh>) psi~|` computed from the vector.
    pub residual_norm: f64,
    /// Generalized spread `Delta H`.
    pub delta_h: f64,
    /// `arccos |<psi~(tau1)|psi~(t)>|`.
    pub phi: f64,
}

/// MT chain on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MtChain {
    pub step: f64,
    pub points: Vec<MtChainPoint>,
}

impl MtChain {
    /// `max_k ||residual| - Delta H|`.
    pub fn max_identity_defect(&self) -> f64 {
        self.points.iter().map(|p| (p.residual_norm - p.delta_h).abs()).fold(0.0, f64::max)
    }

    /// `max_k |phi_{k+1} - phi_k| / h - (Delta H_k + Delta H_{k+1}) / 2`.
    pub fn max_derivative_excess(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].phi - w[0].phi).abs() / self.step - (w[0].delta_h + w[1].delta_h) / 2.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn residual_norm(generator: &ComplexMatrix, psi: &StateVector) -> Result<f64> {
    let (unit, _) = psi.normalize()?;
    let h_psi = unit.apply_local_raw(generator)?;
    let mean = unit.amplitudes().dotc(&h_psi);
    Ok((h_psi - unit.amplitudes() * mean).norm())
}

/// Samples the MT chain on `[tau1, tau2]` with `n` steps.
pub fn mt_phase_chain<'a>(
    model: &NonHermitianModel,
    state: impl Into<StateRef<'a>>,
    tau1: f64,
    tau2: f64,
    n: usize,
) -> Result<MtChain> {
    if !(tau1.is_finite() && tau2.is_finite() && tau1 < tau2) {
        return Err(Error::BadParameter(format!("window [{tau1}, {tau2}] must be finite and ordered")));
    }
    let psi0 = initial_vector(state)?;
    let grid = evolve_on_grid(model, &psi0, tau1, tau2, n)?;
    let step = (tau2 - tau1) / n as f64;
    let points = grid
        .iter()
        .enumerate()
        .map(|(k, psi)| {
            let t = tau1 + k as f64 * step;
            let gen = model.generator_at(t)?;
            Ok(MtChainPoint {
                t,
                residual_norm: residual_norm(&gen, psi)?,
                delta_h: metrics::generalized_std(&gen, psi)?,
                phi: metrics::bures_angle_pure(&grid[0], psi),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MtChain { step, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{random_commuting, random_density, seeded_rng};

    #[test]
    fn ml_chain_holds_on_random_models() {
        let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
        for seed in 0..5 {
            let model = random_commuting(3, seed, 1.0).unwrap();
            let rho = random_density(3, &mut seeded_rng(100 + seed)).unwrap();
            for p in ml_fidelity_chain(&model, &rho, &times).unwrap() {
                assert!(p.max_excess() <= 1e-12, "{p:?}");
            }
        }
    }

    #[test]
    fn mt_chain_holds_on_random_models() {
        for seed in 0..3 {
            let model = random_commuting(3, seed, 1.0).unwrap();
            let psi = StateVector::uniform(3).unwrap();
            let chain = mt_phase_chain(&model, &psi, 0.0, 1.0, 1000).unwrap();
            assert!(chain.max_identity_defect() < 1e-12);
            assert!(chain.max_derivative_excess() < 1e-4);
        }
    }
}

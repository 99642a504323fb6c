//! Bounds for continuously monitored (Lindblad) dynamics, stated for the
//! joint system-field state and evaluated through reduced quantities.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::metrics::{self, ObservableStats};
use crate::propagation::{
    evolve_lindblad, jump_count_moments, pseudo_density, sample_ensemble, LindbladModel, TrajectorySettings,
};
use crate::state::{DensityOperator, StateVector};
use crate::ComplexMatrix;

use super::closed::{commutator_check, mt_integral, ratio_or_flag, within_window};
use super::report::{BoundKind, BoundReport, GroundEnergy};

/// Trajectory ensemble used to estimate jump-count statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub trajectories: usize,
    pub seed: u64,
    pub settings: TrajectorySettings,
}

/// Observable on the joint system-field state.
#[derive(Debug, Clone, Copy)]
pub enum OpenObservable<'a> {
    /// System operator; statistics from `rho_S(t)`.
    System(&'a ComplexMatrix),
    /// Total jump count, with exact moments.
    JumpCount,
    /// Total jump count estimated from trajectories.
    JumpCountEnsemble(EnsembleSpec),
}

/// Observable statistics at `0` and `tau`, plus the Monte Carlo standard
/// error of `ratio^2` when sampled.
fn observable_pair(
    model: &LindbladModel,
    rho0: &DensityOperator,
    tau: f64,
    obs: OpenObservable<'_>,
) -> Result<(ObservableStats, ObservableStats, Option<f64>)> {
    match obs {
        OpenObservable::System(c) => {
            let rho_tau = evolve_lindblad(model, rho0, tau)?;
            Ok((metrics::observable_stats(c, rho0)?, metrics::observable_stats(c, &rho_tau)?, None))
        }
        OpenObservable::JumpCount => {
            let m = jump_count_moments(model, rho0, tau)?;
            Ok((ObservableStats::new(0.0, 0.0), m.stats(), None))
        }
        OpenObservable::JumpCountEnsemble(spec) => {
            let psi0 = pure_vector(rho0)?;
            let e = sample_ensemble(model, &psi0, tau, spec.trajectories, spec.seed, &spec.settings)?;
            let (m, v) = (e.jump_mean, e.jump_variance);
            let se = if v > 0.0 {
                let dm = 2.0 * m / v * e.jump_mean_standard_error;
                let dv = m * m / (v * v) * e.jump_variance_standard_error;
                (dm * dm + dv * dv).sqrt()
            } else {
                f64::INFINITY
            };
            Ok((ObservableStats::new(0.0, 0.0), ObservableStats::new(m, v.sqrt()), Some(se)))
        }
    }
}

/// The state vector of a rank-one density operator.
fn pure_vector(rho: &DensityOperator) -> Result<StateVector> {
    if (rho.purity() - 1.0).abs() > 1e-10 {
        return Err(Error::BadParameter("trajectory sampling needs a pure initial state".into()));
    }
    let eig = rho.eigen();
    let top = eig.dim() - 1;
    StateVector::new(eig.vectors.column(top).into_owned())
}

fn ensure_dims(model: &LindbladModel, rho: &DensityOperator) -> Result<()> {
    if rho.dim() != model.dim() {
        return Err(Error::Shape(format!("state of dim {} for model of dim {}", rho.dim(), model.dim())));
    }
    Ok(())
}

/// Ingredients of the open Margolus-Levitin type bound.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenMlTerms {
    /// Dynamical activity rate `a(0) = Tr[sum L^dagger L rho0]`.
    pub activity: f64,
    pub mean_h: f64,
    pub ground_energy: f64,
    pub lambda: f64,
    pub commutator_norm: f64,
    pub commutes: bool,
}

pub fn open_ml_terms(model: &LindbladModel, rho0: &DensityOperator, tau: f64) -> Result<OpenMlTerms> {
    ensure_dims(model, rho0)?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::BadParameter(format!("time {tau} must be finite and nonnegative")));
    }
    let (commutator_norm, commutes) = commutator_check(model.h_s(), &model.dissipation_rate_operator());
    let activity = model.activity_rate(rho0);
    let mean_h = rho0.expectation(model.h_s()).re;
    let ground_energy = GroundEnergy::of(model.h_s())?.value();
    Ok(OpenMlTerms {
        activity,
        mean_h,
        ground_energy,
        lambda: (-activity * tau / 2.0).exp() - tau * (mean_h - ground_energy),
        commutator_norm,
        commutes,
    })
}

/// `Lambda^_ML = e^{-a(0) tau / 2} - tau (<H_S> - E_{S,g})`.
pub fn lambda_ml_open(model: &LindbladModel, rho0: &DensityOperator, tau: f64) -> Result<f64> {
    let t = open_ml_terms(model, rho0, tau)?;
    if !t.commutes {
        return Err(Error::CommutatorViolation { norm: t.commutator_norm });
    }
    Ok(t.lambda)
}

fn with_open_ml_conditions(report: BoundReport, t: &OpenMlTerms, tau: f64) -> BoundReport {
    report
        .condition_with("commutator", t.commutes, t.commutator_norm)
        .condition("time_independent", true)
        .condition_with("lambda_positive", t.lambda > 0.0, t.lambda)
        .param("tau", tau)
        .param("lambda", t.lambda)
        .param("activity", t.activity)
        .param("mean_h", t.mean_h)
        .param("ground_energy", t.ground_energy)
}

/// `1 + tau (<H_S> - E_{S,g}) - e^{-a(0) tau / 2} >= 1 - sqrt(Fid(rho_S(0), rho_S(tau)))`.
pub fn qsl_ml_open(model: &LindbladModel, rho0: &DensityOperator, tau: f64) -> Result<BoundReport> {
    let t = open_ml_terms(model, rho0, tau)?;
    let rho_tau = evolve_lindblad(model, rho0, tau)?;
    let rhs = metrics::one_minus_sqrt_fidelity(rho0, &rho_tau)?;
    Ok(with_open_ml_conditions(BoundReport::new(BoundKind::QslMlOpen, 1.0 - t.lambda, rhs), &t, tau)
        .param("bures_angle", metrics::bures_angle(rho0, &rho_tau)?))
}

/// Open ML uncertainty relation; for `H_S = 0` also the form `e^{a tau} - 1`.
pub fn tur_ml_open(
    model: &LindbladModel,
    rho0: &DensityOperator,
    tau: f64,
    obs: OpenObservable<'_>,
) -> Result<Vec<BoundReport>> {
    let t = open_ml_terms(model, rho0, tau)?;
    let (s0, s1, mc) = observable_pair(model, rho0, tau, obs)?;
    let (ratio, ok) = ratio_or_flag(&s0, &s1);
    let build = |kind, lhs| {
        let mut r = with_open_ml_conditions(BoundReport::new(kind, lhs, ratio), &t, tau)
            .condition("observable_nondegenerate", ok)
            .param("mean_c_0", s0.mean)
            .param("mean_c_tau", s1.mean)
            .param("std_c_0", s0.std)
            .param("std_c_tau", s1.std);
        if let Some(se) = mc {
            r = r.param("mc_rhs_stderr", se);
        }
        r
    };
    let mut out = vec![build(BoundKind::TurMlOpen, 1.0 / (t.lambda * t.lambda) - 1.0)];
    if max_abs(model.h_s()) <= 1e-14 {
        out.push(build(BoundKind::TurMlOpenClassical, (t.activity * tau).exp_m1()));
    }
    Ok(out)
}

/// Ingredients of the open Mandelstam-Tamm type bound.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenMtTerms {
    /// `int_0^tau Delta_P H_eff dt`.
    pub integral: f64,
    pub quad_err: f64,
    /// No-jump weight `Z(tau)`.
    pub z: f64,
}

impl OpenMtTerms {
    pub fn lambda(&self) -> f64 {
        self.z.sqrt() * self.integral.cos()
    }
}

/// The spread `Delta_P H_eff` of the pseudo state equals the generalized
/// spread of `H_eff` along the normalized no-jump trajectory, so the closed
/// quadrature is reused on the no-jump model.
pub fn open_mt_terms(model: &LindbladModel, rho0: &DensityOperator, tau: f64, panels: usize) -> Result<OpenMtTerms> {
    ensure_dims(model, rho0)?;
    let q = mt_integral(&model.no_jump_model(), rho0, 0.0, tau, panels)?;
    let z = pseudo_density(model, rho0, tau)?.z;
    Ok(OpenMtTerms { integral: q.value, quad_err: q.quad_err, z })
}

/// `Lambda^_MT = sqrt(Z(tau)) cos(int Delta_P H_eff dt)`.
pub fn lambda_mt_open(model: &LindbladModel, rho0: &DensityOperator, tau: f64, panels: usize) -> Result<f64> {
    let t = open_mt_terms(model, rho0, tau, panels)?;
    if !within_window(t.integral) {
        return Err(Error::WindowExceeded { integral: t.integral });
    }
    Ok(t.lambda())
}

/// `int Delta_P H_eff >= arccos sqrt(Fid(rho_S(0), rho_S(tau)) / Z(tau))`,
/// inapplicable when `Fid > Z`.
pub fn qsl_mt_open(model: &LindbladModel, rho0: &DensityOperator, tau: f64, panels: usize) -> Result<BoundReport> {
    let t = open_mt_terms(model, rho0, tau, panels)?;
    let rho_tau = evolve_lindblad(model, rho0, tau)?;
    let fid = metrics::fidelity(rho0, &rho_tau)?;
    let ratio = fid / t.z;
    let in_domain = ratio <= 1.0 + 1e-12;
    let rhs = ratio.min(1.0).sqrt().acos();
    let mut report = BoundReport::new(BoundKind::QslMtOpen, t.integral, rhs)
        .condition_with("window_within_pi_half", within_window(t.integral), t.integral)
        .condition_with("fidelity_at_most_z", in_domain, ratio)
        .param("tau", tau)
        .param("integral", t.integral)
        .param("z", t.z)
        .param("fidelity", fid)
        .quad_err(t.quad_err);
    if !in_domain {
        report = report.note(Error::DomainError { ratio }.to_string());
    }
    Ok(report)
}

/// `1 / (Z cos^2(int Delta_P H_eff)) - 1 >= ratio^2`.
pub fn tur_mt_open(
    model: &LindbladModel,
    rho0: &DensityOperator,
    tau: f64,
    obs: OpenObservable<'_>,
    panels: usize,
) -> Result<BoundReport> {
    let t = open_mt_terms(model, rho0, tau, panels)?;
    let (s0, s1, mc) = observable_pair(model, rho0, tau, obs)?;
    let (ratio, ok) = ratio_or_flag(&s0, &s1);
    let strict = t.integral < FRAC_PI_2;
    let lhs = if strict { 1.0 / (t.z * t.integral.cos().powi(2)) - 1.0 } else { f64::INFINITY };
    let lhs_err =
        if strict { 2.0 * t.integral.tan() / (t.z * t.integral.cos().powi(2)) * t.quad_err } else { f64::INFINITY };
    let mut r = BoundReport::new(BoundKind::TurMtOpen, lhs, ratio)
        .condition_with("window_below_pi_half", strict, t.integral)
        .condition("observable_nondegenerate", ok)
        .param("tau", tau)
        .param("integral", t.integral)
        .param("z", t.z)
        .param("mean_c_0", s0.mean)
        .param("mean_c_tau", s1.mean)
        .quad_err(lhs_err)
        .note("observable statistics taken in the joint system-field state (rho_S(t) for system observables), not in the pseudo state");
    if let Some(se) = mc {
        r = r.param("mc_rhs_stderr", se);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::no_jump_overlap;
    use crate::{c64, ComplexVector};

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(v.len(), v.iter().map(|&x| c64(x, 0.0))))
    }

    fn dephasing(gamma: f64) -> LindbladModel {
        LindbladModel::new(ComplexMatrix::zeros(2, 2), vec![diag(&[1.0, -1.0]) * c64(gamma.sqrt(), 0.0)]).unwrap()
    }

    fn plus_rho() -> DensityOperator {
        DensityOperator::new(ComplexMatrix::from_element(2, 2, c64(0.5, 0.0))).unwrap()
    }

    #[test]
    fn dephasing_ml_equality() {
        let model = dephasing(1.0);
        for tau in [0.1, 0.5, 1.0, 2.0] {
            let lam = lambda_ml_open(&model, &plus_rho(), tau).unwrap();
            let ov = no_jump_overlap(&model, &plus_rho(), tau).unwrap().norm();
            assert!((lam - (-tau / 2.0f64).exp()).abs() < 1e-14);
            assert!((ov - lam).abs() < 1e-12);
            let mt = lambda_mt_open(&model, &plus_rho(), tau, 40).unwrap();
            assert!((mt - lam).abs() < 1e-10);
        }
    }

    #[test]
    fn dephasing_qsl_ml_open_closed_form() {
        let r = qsl_ml_open(&dephasing(1.0), &plus_rho(), 1.0).unwrap();
        let fid: f64 = 0.5 + 0.5 * (-2.0f64).exp();
        assert!((r.rhs - (1.0 - fid.sqrt())).abs() < 1e-12);
        assert!((r.lhs - (1.0 - (-0.5f64).exp())).abs() < 1e-14);
        assert!(r.applicable && r.slack > 0.0);
        let z = qsl_ml_open(&dephasing(1.0), &plus_rho(), 0.0).unwrap();
        assert!(z.lhs.abs() < 1e-15 && z.rhs.abs() < 1e-12);
    }

    #[test]
    fn dephasing_qsl_mt_open_is_out_of_domain() {
        let r = qsl_mt_open(&dephasing(1.0), &plus_rho(), 1.0, 40).unwrap();
        assert!(!r.applicable);
        assert_eq!(r.failed_conditions(), vec!["fidelity_at_most_z"]);
        assert!(r.conditions[1].value.unwrap() > 1.0);
    }

    #[test]
    fn dephasing_jump_count_tur() {
        let model = dephasing(1.0);
        let ml = tur_ml_open(&model, &plus_rho(), 1.0, OpenObservable::JumpCount).unwrap();
        assert_eq!(ml.len(), 2);
        for r in &ml {
            assert!((r.rhs - 1.0).abs() < 1e-10);
            assert!((r.lhs - (1f64.exp() - 1.0)).abs() < 1e-12);
        }
        let mt = tur_mt_open(&model, &plus_rho(), 1.0, OpenObservable::JumpCount, 40).unwrap();
        assert!((mt.lhs - (1f64.exp() - 1.0)).abs() < 1e-10);
        assert!(mt.applicable && mt.slack > 0.0);
    }

    #[test]
    fn no_jumps_collapse_to_closed_bounds() {
        use crate::bounds::closed;
        use crate::propagation::NonHermitianModel;
        let h = diag(&[0.0, 0.7]);
        let model = LindbladModel::new(h.clone(), vec![]).unwrap();
        let closed_model = NonHermitianModel::hermitian(h).unwrap();
        let rho0 = plus_rho();
        let tau = 0.8;
        let a = lambda_ml_open(&model, &rho0, tau).unwrap();
        let b = closed::lambda_ml(&closed_model, &rho0, tau).unwrap();
        assert!((a - b).abs() < 1e-10);
        let a = qsl_mt_open(&model, &rho0, tau, 40).unwrap();
        let b = closed::qsl_mt(&closed_model, &rho0, 0.0, tau, 40).unwrap();
        assert!((a.lhs - b.lhs).abs() < 1e-10 && (a.rhs - b.rhs).abs() < 1e-7);
    }

    #[test]
    fn identity_observable_gives_zero_rhs() {
        let id = ComplexMatrix::identity(2, 2);
        let r = tur_ml_open(&dephasing(0.4), &plus_rho(), 0.7, OpenObservable::System(&id)).unwrap();
        assert_eq!(r[0].rhs, 0.0);
    }
}

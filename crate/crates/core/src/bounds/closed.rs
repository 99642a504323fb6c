//! Bounds for closed non-Hermitian dynamics `H - i Gamma`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::metrics::{self, ObservableStats, StateRef};
use crate::propagation::{evolve_between, evolve_nonhermitian, evolve_on_grid, NonHermitianModel};
use crate::quadrature::{self, admissible_panels};
use crate::state::{normalize, purify, Layout, StateVector};
use crate::ComplexMatrix;

use super::report::{BoundKind, BoundReport, GroundEnergy};

pub const COMMUTATOR_TOL: f64 = 1e-10;
/// Slack allowed on the `int <= pi/2` window condition at exact saturation.
const WINDOW_TOL: f64 = 1e-12;
/// Default finite-difference step for `d<C>/dt`.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// `|[H, G]|_max` and whether it is below `1e-10 (1 + |H|_max |G|_max)`.
pub fn commutator_check(h: &ComplexMatrix, g: &ComplexMatrix) -> (f64, bool) {
    let norm = max_abs(&linalg::commutator(h, g));
    (norm, norm <= COMMUTATOR_TOL * (1.0 + max_abs(h) * max_abs(g)))
}

/// Unit initial vector: the normalized pure state or a purification.
pub fn initial_vector<'a>(state: impl Into<StateRef<'a>>) -> Result<StateVector> {
    match state.into() {
        StateRef::Pure(psi) => Ok(normalize(psi)?.0),
        StateRef::Mixed(rho) => purify(rho),
    }
}

fn ensure_dim(model: &NonHermitianModel, psi: &StateVector) -> Result<()> {
    if psi.system_dim() != model.dim() {
        return Err(Error::Shape(format!("state of dim {} for model of dim {}", psi.system_dim(), model.dim())));
    }
    Ok(())
}

fn ensure_time(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::BadParameter(format!("time {tau} must be finite and nonnegative")));
    }
    Ok(())
}

/// Bures angle and `1 - sqrt(F)` between the normalized (reduced) states.
pub(crate) fn bures_pair(a: &StateVector, b: &StateVector) -> Result<(f64, f64)> {
    match (a.layout(), b.layout()) {
        (Layout::Flat, Layout::Flat) => Ok((metrics::bures_angle_pure(a, b), metrics::one_minus_overlap_pure(a, b))),
        _ => {
            let (ra, rb) = (a.reduced()?, b.reduced()?);
            Ok((metrics::bures_angle(&ra, &rb)?, metrics::one_minus_sqrt_fidelity(&ra, &rb)?))
        }
    }
}

/// `ratio^2`, or `(+inf, false)` when the observable is degenerate.
pub(crate) fn ratio_or_flag(a: &ObservableStats, b: &ObservableStats) -> (f64, bool) {
    match metrics::scaled_ratio_sq(a, b) {
        Ok(r) => (r, true),
        Err(_) => (f64::INFINITY, false),
    }
}

/// Ingredients of the Margolus-Levitin type bound at time `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlTerms {
    pub mean_h: f64,
    pub mean_gamma: f64,
    pub ground_energy: f64,
    /// `e^{-<Gamma> tau} - tau (<H> - E_g)`.
    pub numerator: f64,
    /// `|psi(tau)|`.
    pub norm: f64,
    pub lambda: f64,
    pub commutator_norm: f64,
    pub commutes: bool,
}

/// Evaluates the ML ingredients and returns them with `psi(0)` and `psi(tau)`.
pub fn ml_terms<'a>(
    model: &NonHermitianModel,
    state: impl Into<StateRef<'a>>,
    tau: f64,
) -> Result<(MlTerms, StateVector, StateVector)> {
    if model.is_time_dependent() {
        return Err(Error::TimeDependent);
    }
    ensure_time(tau)?;
    let psi0 = initial_vector(state)?;
    ensure_dim(model, &psi0)?;
    let (commutator_norm, commutes) = commutator_check(model.h(), model.gamma());
    let mean_h = psi0.expectation(model.h())?.re;
    let mean_gamma = psi0.expectation(model.gamma())?.re;
    let ground_energy = GroundEnergy::of(model.h())?.value();
    let psi_tau = evolve_nonhermitian(model, &psi0, tau)?;
    let norm = psi_tau.norm();
    let numerator = (-mean_gamma * tau).exp() - tau * (mean_h - ground_energy);
    let terms = MlTerms {
        mean_h,
        mean_gamma,
        ground_energy,
        numerator,
        norm,
        lambda: numerator / norm,
        commutator_norm,
        commutes,
    };
    Ok((terms, psi0, psi_tau))
}

/// `Lambda_ML(0, tau) = [e^{-<Gamma> tau} - tau (<H> - E_g)] / |psi(tau)|`.
pub fn lambda_ml<'a>(model: &NonHermitianModel, state: impl Into<StateRef<'a>>, tau: f64) -> Result<f64> {
    let (terms, ..) = ml_terms(model, state, tau)?;
    if !terms.commutes {
        return Err(Error::CommutatorViolation { norm: terms.commutator_norm });
    }
    Ok(terms.lambda)
}

fn with_ml_conditions(report: BoundReport, terms: &MlTerms, tau: f64) -> BoundReport {
    report
        .condition_with("commutator", terms.commutes, terms.commutator_norm)
        .condition("gamma_psd", true)
        .condition("time_independent", true)
        .condition_with("numerator_positive", terms.numerator > 0.0, terms.numerator)
        .param("tau", tau)
        .param("lambda", terms.lambda)
        .param("norm", terms.norm)
        .param("mean_h", terms.mean_h)
        .param("mean_gamma", terms.mean_gamma)
        .param("ground_energy", terms.ground_energy)
}

/// ML speed limit in full and simplified form.
pub fn qsl_ml<'a>(model: &NonHermitianModel, state: impl Into<StateRef<'a>>, tau: f64) -> Result<[BoundReport; 2]> {
    let (terms, psi0, psi_tau) = ml_terms(model, state, tau)?;
    let (angle, rhs) = bures_pair(&psi0, &psi_tau)?;
    let full = with_ml_conditions(BoundReport::new(BoundKind::QslMl, 1.0 - terms.lambda, rhs), &terms, tau)
        .condition_with("lambda_at_most_one", terms.lambda <= 1.0 + 1e-12, terms.lambda)
        .param("bures_angle", angle);
    let gap = terms.mean_h - terms.ground_energy;
    let simplified = with_ml_conditions(
        BoundReport::new(BoundKind::QslMlSimplified, tau * (gap + terms.mean_gamma), rhs),
        &terms,
        tau,
    )
    .param("bures_angle", angle)
    .param("intermediate", tau * gap + 1.0 - (-terms.mean_gamma * tau).exp())
    .param("tau_bound", if gap + terms.mean_gamma > 0.0 { rhs / (gap + terms.mean_gamma) } else { 0.0 });
    Ok([full, simplified])
}

/// ML uncertainty relation, tight (`|psi(tau)|^2`-weighted) and loose forms.
pub fn tur_ml<'a>(
    model: &NonHermitianModel,
    state: impl Into<StateRef<'a>>,
    tau: f64,
    c: &ComplexMatrix,
) -> Result<[BoundReport; 2]> {
    let (terms, psi0, psi_tau) = ml_terms(model, state, tau)?;
    let s0 = metrics::observable_stats(c, &psi0)?;
    let s1 = metrics::observable_stats(c, &psi_tau)?;
    let (ratio, ok) = ratio_or_flag(&s0, &s1);
    let num2 = terms.numerator * terms.numerator;
    let build = |kind, lhs| {
        with_ml_conditions(BoundReport::new(kind, lhs, ratio), &terms, tau)
            .condition("observable_nondegenerate", ok)
            .param("mean_c_0", s0.mean)
            .param("mean_c_tau", s1.mean)
            .param("std_c_0", s0.std)
            .param("std_c_tau", s1.std)
    };
    Ok([build(BoundKind::TurMl, terms.norm * terms.norm / num2 - 1.0), build(BoundKind::TurMlLoose, 1.0 / num2 - 1.0)])
}

/// `int_{tau1}^{tau2} Delta H(t) dt` along the normalized trajectory.
#[derive(Debug, Clone)]
pub struct MtIntegral {
    pub value: f64,
    pub quad_err: f64,
    pub panels: usize,
    /// `|psi(tau1)>` and `|psi(tau2)>` (unnormalized).
    pub start: StateVector,
    pub end: StateVector,
}

impl MtIntegral {
    /// Temporal average of `Delta H`.
    pub fn mean_rate(&self, duration: f64) -> f64 {
        if duration > 0.0 {
            self.value / duration
        } else {
            0.0
        }
    }
}

/// Composite Simpson quadrature of the generalized spread `Delta H(t)`.
pub fn mt_integral<'a>(
    model: &NonHermitianModel,
    state: impl Into<StateRef<'a>>,
    tau1: f64,
    tau2: f64,
    panels: usize,
) -> Result<MtIntegral> {
    if !(tau1.is_finite() && tau2.is_finite() && tau1 <= tau2) {
        return Err(Error::BadParameter(format!("window [{tau1}, {tau2}] must be finite and ordered")));
    }
    let psi0 = initial_vector(state)?;
    ensure_dim(model, &psi0)?;
    let n = admissible_panels(panels);
    let grid = evolve_on_grid(model, &psi0, tau1, tau2, n)?;
    let h = (tau2 - tau1) / n as f64;
    let mut samples = Vec::with_capacity(n + 1);
    for (k, psi) in grid.iter().enumerate() {
        let gen = model.generator_at(tau1 + k as f64 * h)?;
        samples.push(metrics::generalized_std(&gen, psi)?);
    }
    let q = if tau1 == tau2 {
        quadrature::Quadrature { value: 0.0, error_estimate: 0.0, panels: n }
    } else {
        quadrature::simpson_samples(&samples, h)?
    };
    Ok(MtIntegral {
        value: q.value,
        quad_err: q.error_estimate,
        panels: n,
        start: grid[0].clone(),
        end: grid[n].clone(),
    })
}

pub(crate) fn within_window(integral: f64) -> bool {
    integral <= FRAC_PI_2 * (1.0 + WINDOW_TOL)
}

/// `Lambda_MT = cos(int Delta H dt)`.
pub fn lambda_mt<'a>(
    model: &NonHermitianModel,
    state: impl Into<StateRef<'a>>,
    tau1: f64,
    tau2: f64,
    panels: usize,
) -> Result<f64> {
    let q = mt_integral(model, state, tau1, tau2, panels)?;
    if !within_window(q.value) {
        return Err(Error::WindowExceeded { integral: q.value });
    }
    Ok(q.value.cos())
}

/// MT speed limit `int Delta H >= L_D(rho~(tau1), rho~(tau2))`.
pub fn qsl_mt<'a>(
    model: &NonHermitianModel,
    state: impl Into<StateRef<'a>>,
    tau1: f64,
    tau2: f64,
    panels: usize,
) -> Result<BoundReport> {
    let q = mt_integral(model, state, tau1, tau2, panels)?;
    let (angle, _) = bures_pair(&q.start, &q.end)?;
    let duration = tau2 - tau1;
    let mean = q.mean_rate(duration);
    let tau_min = if mean > 0.0 { angle / mean } else { 0.0 };
    Ok(BoundReport::new(BoundKind::QslMt, q.value, angle)
        .condition_with("window_within_pi_half", within_window(q.value), q.value)
        .param("tau1", tau1)
        .param("tau2", tau2)
        .param("integral", q.value)
        .param("mean_delta_h", mean)
        .param("tau_min", tau_min)
        .param("lambda", q.value.cos())
        .quad_err(q.quad_err))
}

/// MT uncertainty relation `tan^2(int Delta H) >= ratio^2`.
pub fn tur_mt<'a>(
    model: &NonHermitianModel,
    state: impl Into<StateRef<'a>>,
    tau1: f64,
    tau2: f64,
    c: &ComplexMatrix,
    panels: usize,
) -> Result<BoundReport> {
    let q = mt_integral(model, state, tau1, tau2, panels)?;
    let s1 = metrics::observable_stats(c, &q.start)?;
    let s2 = metrics::observable_stats(c, &q.end)?;
    let (ratio, ok) = ratio_or_flag(&s1, &s2);
    let strict = q.value < FRAC_PI_2;
    let lhs = if strict { q.value.tan().powi(2) } else { f64::INFINITY };
    // tan^2 amplifies the quadrature error by d/dx tan^2 x = 2 tan x sec^2 x.
    let lhs_err = if strict { 2.0 * q.value.tan() / q.value.cos().powi(2) * q.quad_err } else { f64::INFINITY };
    Ok(BoundReport::new(BoundKind::TurMt, lhs, ratio)
        .condition_with("window_below_pi_half", strict, q.value)
        .condition("observable_nondegenerate", ok)
        .param("tau1", tau1)
        .param("tau2", tau2)
        .param("integral", q.value)
        .param("mean_c_1", s1.mean)
        .param("mean_c_2", s2.mean)
        .quad_err(lhs_err))
}

/// Energy-time relation `Delta C(t) Delta H(t) >= |d<C>/dt| / 2`, with the
/// derivative from a centered difference of step `h` (backward evolution is
/// used when `t < h`).
pub fn energy_time<'a>(
    model: &NonHermitianModel,
    state: impl Into<StateRef<'a>>,
    t: f64,
    c: &ComplexMatrix,
    h: f64,
) -> Result<BoundReport> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::BadParameter(format!("finite-difference step {h} must be positive")));
    }
    let psi0 = initial_vector(state)?;
    ensure_dim(model, &psi0)?;
    let psi_t = evolve_nonhermitian(model, &psi0, t)?;
    let plus = evolve_between(model, &psi_t, t, t + h)?;
    let minus = evolve_between(model, &psi_t, t, t - h)?;
    let sc = metrics::observable_stats(c, &psi_t)?;
    let dh = metrics::generalized_std(&model.generator_at(t)?, &psi_t)?;
    let cp = metrics::observable_stats(c, &plus)?.mean;
    let cm = metrics::observable_stats(c, &minus)?.mean;
    let rate = (cp - cm) / (2.0 * h);
    Ok(BoundReport::new(BoundKind::EnergyTime, sc.std * dh, rate.abs() / 2.0)
        .param("t", t)
        .param("fd_step", h)
        .param("std_c", sc.std)
        .param("delta_h", dh)
        .param("d_mean_c", rate))
}

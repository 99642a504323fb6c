use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::state::{DensityOperator, StateVector, NORM_FLOOR};
use crate::{c64, ComplexMatrix};

use super::NonHermitianModel;

/// Time-ordered propagator with the Richardson error estimate of the
/// integrator (zero for constant generators).
#[derive(Debug, Clone)]
pub struct TimeOrdered {
    pub matrix: ComplexMatrix,
    pub error_estimate: f64,
    pub steps: usize,
}

/// Product of midpoint exponentials over `n` equal steps, later times on the left.
fn midpoint_product(model: &NonHermitianModel, t0: f64, t1: f64, n: usize) -> Result<ComplexMatrix> {
    let dt = (t1 - t0) / n as f64;
    let mut m = ComplexMatrix::identity(model.dim(), model.dim());
    for k in 0..n {
        let tm = t0 + (k as f64 + 0.5) * dt;
        let step = linalg::expm(&(model.generator_at(tm)? * c64(0.0, -dt)))?;
        m = step * m;
    }
    Ok(m)
}

/// `T exp(-i int_{t0}^{t1} H(t) dt)`.
///
/// Constant generators are exponentiated directly. Time-dependent ones use
/// the second-order midpoint exponential product at `n` and `2n` steps,
/// combined by Richardson extrapolation `(4 M_2n - M_n) / 3`; the reported
/// error is `|M_2n - M_n|_max / 3`.
pub fn time_ordered_propagator(model: &NonHermitianModel, t0: f64, t1: f64) -> Result<TimeOrdered> {
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::BadParameter(format!("non-finite time window [{t0}, {t1}]")));
    }
    if !model.is_time_dependent() {
        let matrix = linalg::expm(&(model.generator() * c64(0.0, -(t1 - t0))))?;
        return Ok(TimeOrdered { matrix, error_estimate: 0.0, steps: 1 });
    }
    if t0 == t1 {
        return Ok(TimeOrdered {
            matrix: ComplexMatrix::identity(model.dim(), model.dim()),
            error_estimate: 0.0,
            steps: 0,
        });
    }
    let n = ((model.steps_per_unit_time() * (t1 - t0).abs()).ceil() as usize).max(1);
    let coarse = midpoint_product(model, t0, t1, n)?;
    let fine = midpoint_product(model, t0, t1, 2 * n)?;
    let diff = &fine - &coarse;
    let error_estimate = max_abs(&diff) / 3.0;
    let matrix = fine + diff * c64(1.0 / 3.0, 0.0);
    if !error_estimate.is_finite() || !matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::IntegratorDiverged(format!("non-finite propagator on [{t0}, {t1}]")));
    }
    Ok(TimeOrdered { matrix, error_estimate, steps: 2 * n })
}

/// Propagator from `t0` to `t1`.
pub fn propagator(model: &NonHermitianModel, t0: f64, t1: f64) -> Result<ComplexMatrix> {
    Ok(time_ordered_propagator(model, t0, t1)?.matrix)
}

fn checked(psi: StateVector) -> Result<StateVector> {
    let norm = psi.norm();
    if norm < NORM_FLOOR {
        return Err(Error::NormUnderflow { norm });
    }
    Ok(psi)
}

fn apply(u: &ComplexMatrix, psi: &StateVector) -> Result<StateVector> {
    let amps = psi.apply_local_raw(u)?;
    let norm = amps.norm();
    if !(norm >= NORM_FLOOR) {
        return Err(Error::NormUnderflow { norm });
    }
    StateVector::with_layout(amps, psi.layout())
}

/// `|psi(t)> = T exp(-i int_0^t H) |psi0>` (unnormalized); acts on the
/// system factor of purified states.
pub fn evolve_nonhermitian(model: &NonHermitianModel, psi0: &StateVector, t: f64) -> Result<StateVector> {
    evolve_between(model, psi0, 0.0, t)
}

/// Evolves a state given at `t0` to `t1`; backward steps are allowed.
pub fn evolve_between(model: &NonHermitianModel, psi: &StateVector, t0: f64, t1: f64) -> Result<StateVector> {
    checked(apply(&propagator(model, t0, t1)?, psi)?)
}

/// States at `t0 + k (t1 - t0) / n` for `k = 0..=n`. Constant generators
/// are exponentiated per grid point so roundoff does not accumulate along
/// the grid; time-dependent ones are stepped.
pub fn evolve_on_grid(
    model: &NonHermitianModel,
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<Vec<StateVector>> {
    if n == 0 {
        return Err(Error::BadParameter("grid needs at least one step".into()));
    }
    let h = (t1 - t0) / n as f64;
    let at = |k: usize| t0 + k as f64 * h;
    if !model.is_time_dependent() {
        return (0..=n).map(|k| evolve_between(model, psi0, 0.0, at(k))).collect();
    }
    let mut out = Vec::with_capacity(n + 1);
    let mut psi = evolve_between(model, psi0, 0.0, t0)?;
    out.push(psi.clone());
    for k in 0..n {
        psi = apply(&propagator(model, at(k), at(k + 1))?, &psi)?;
        out.push(psi.clone());
    }
    Ok(out)
}

/// `rho(t) = U rho0 U^dagger` with `U = T exp(-i int_0^t H)` (unnormalized).
pub fn evolve_density_nonhermitian(model: &NonHermitianModel, rho0: &DensityOperator, t: f64) -> Result<ComplexMatrix> {
    if rho0.dim() != model.dim() {
        return Err(Error::Shape(format!("state of dim {} for model of dim {}", rho0.dim(), model.dim())));
    }
    let u = propagator(model, 0.0, t)?;
    let rho = &u * rho0.matrix() * u.adjoint();
    let tr = linalg::trace(&rho).re;
    if tr < NORM_FLOOR * NORM_FLOOR {
        return Err(Error::NormUnderflow { norm: tr.max(0.0).sqrt() });
    }
    Ok(linalg::hermitian_part(&rho))
}

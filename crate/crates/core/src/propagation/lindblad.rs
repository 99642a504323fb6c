use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::metrics;
use crate::state::{DensityOperator, NORM_FLOOR};
use crate::{c64, ComplexMatrix, ComplexVector, C64};

use super::{closed, LindbladModel};

/// Largest admissible `dt |H_eff|` for a first-order Kraus step.
pub const MAX_KRAUS_SCALED_STEP: f64 = 0.1;
/// Trace drift tolerated from the superoperator exponential.
pub const LINDBLAD_TRACE_TOL: f64 = 1e-8;

fn ensure_dims(model: &LindbladModel, rho: &DensityOperator) -> Result<()> {
    if rho.dim() != model.dim() {
        return Err(Error::Shape(format!("state of dim {} for model of dim {}", rho.dim(), model.dim())));
    }
    Ok(())
}

fn unvec(v: &ComplexVector, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(d, d, v.as_slice())
}

fn vec_of(m: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(m.as_slice())
}

/// Turns a numerically evolved matrix back into a unit-trace state, failing
/// if it drifted further than integration noise allows.
fn settle(m: &ComplexMatrix) -> Result<DensityOperator> {
    let m = linalg::hermitian_part(m);
    let tr = linalg::trace(&m).re;
    if !tr.is_finite() || (tr - 1.0).abs() > LINDBLAD_TRACE_TOL {
        return Err(Error::IntegratorDiverged(format!("trace drifted to {tr}")));
    }
    let eig = linalg::herm_eig(&m)?;
    if eig.min() < -LINDBLAD_TRACE_TOL {
        return Err(Error::IntegratorDiverged(format!("eigenvalue {} after evolution", eig.min())));
    }
    let m = if eig.min() < 0.0 { eig.map(|v| v.max(0.0)) } else { m };
    let tr = linalg::trace(&m).re;
    DensityOperator::new(m / c64(tr, 0.0))
}

/// `exp(L t)` on column-stacked density matrices.
pub fn lindblad_superpropagator(model: &LindbladModel, t: f64) -> Result<ComplexMatrix> {
    linalg::expm(&(model.liouvillian() * c64(t, 0.0)))
}

/// Solution of the Lindblad equation at time `t`, via the exponential of
/// the vectorized Liouvillian.
pub fn evolve_lindblad(model: &LindbladModel, rho0: &DensityOperator, t: f64) -> Result<DensityOperator> {
    ensure_dims(model, rho0)?;
    let v = lindblad_superpropagator(model, t)? * vec_of(rho0.matrix());
    settle(&unvec(&v, model.dim()))
}

/// Kraus operators `V_0 = I - i dt H_eff`, `V_m = sqrt(dt) L_m`.
pub fn kraus_operators(model: &LindbladModel, dt: f64) -> Result<Vec<ComplexMatrix>> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::BadParameter(format!("step {dt} must be finite and nonnegative")));
    }
    let heff = model.effective_hamiltonian();
    let scaled = dt * linalg::op_norm(&heff);
    if scaled > MAX_KRAUS_SCALED_STEP {
        return Err(Error::StepTooLarge { dt, scaled });
    }
    let d = model.dim();
    let mut ops = Vec::with_capacity(model.channels() + 1);
    ops.push(ComplexMatrix::identity(d, d) - heff * c64(0.0, dt));
    ops.extend(model.jumps().iter().map(|l| l * c64(dt.sqrt(), 0.0)));
    Ok(ops)
}

/// One first-order Kraus step `sum_m V_m rho V_m^dagger`. The trace is
/// preserved only to `O(dt^2)`, so the result is not renormalized.
pub fn kraus_step(model: &LindbladModel, rho: &DensityOperator, dt: f64) -> Result<DensityOperator> {
    ensure_dims(model, rho)?;
    let d = model.dim();
    let out = kraus_operators(model, dt)?
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, v| acc + v * rho.matrix() * v.adjoint());
    DensityOperator::unnormalized(linalg::hermitian_part(&out))
}

/// No-jump conditioned state `M rho0 M^dagger / Z` and its weight `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoDensity {
    pub rho_p: DensityOperator,
    pub z: f64,
}

/// `M = exp(-i H_eff t)`.
pub fn no_jump_propagator(model: &LindbladModel, t: f64) -> Result<ComplexMatrix> {
    closed::propagator(&model.no_jump_model(), 0.0, t)
}

pub fn pseudo_density(model: &LindbladModel, rho0: &DensityOperator, t: f64) -> Result<PseudoDensity> {
    ensure_dims(model, rho0)?;
    let m = no_jump_propagator(model, t)?;
    let sigma = linalg::hermitian_part(&(&m * rho0.matrix() * m.adjoint()));
    let z = linalg::trace(&sigma).re;
    if !(z >= NORM_FLOOR) {
        return Err(Error::NormUnderflow { norm: z.max(0.0).sqrt() });
    }
    let scaled = sigma / c64(z, 0.0);
    let eig = linalg::herm_eig(&scaled)?;
    let scaled = if eig.min() < 0.0 { eig.map(|v| v.max(0.0)) } else { scaled };
    let tr = linalg::trace(&scaled).re;
    Ok(PseudoDensity { rho_p: DensityOperator::new(scaled / c64(tr, 0.0))?, z })
}

/// `sqrt(Tr[H_eff^dagger H_eff rho_P] - |Tr[H_eff rho_P]|^2)` at time `t`.
pub fn delta_p_heff(model: &LindbladModel, rho0: &DensityOperator, t: f64) -> Result<f64> {
    let p = pseudo_density(model, rho0, t)?;
    metrics::generalized_std(&model.effective_hamiltonian(), &p.rho_p)
}

/// `<Psi(0)|Psi(t)> = Tr[M rho0]` between the joint system-field states.
pub fn no_jump_overlap(model: &LindbladModel, rho0: &DensityOperator, t: f64) -> Result<C64> {
    ensure_dims(model, rho0)?;
    Ok((no_jump_propagator(model, t)? * rho0.matrix()).trace())
}

/// Moments of the total jump count `N` up to time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpCountMoments {
    pub mean: f64,
    pub second: f64,
}

impl JumpCountMoments {
    pub fn variance(&self) -> f64 {
        (self.second - self.mean * self.mean).max(0.0)
    }

    pub fn stats(&self) -> metrics::ObservableStats {
        metrics::ObservableStats::new(self.mean, self.variance().sqrt())
    }
}

/// Exact jump-count moments from the counting-field hierarchy
/// `rho_k = sum_n n^k rho^(n)`:
/// `d rho_1 = L rho_1 + J rho_0`, `d rho_2 = L rho_2 + 2 J rho_1 + J rho_0`,
/// with `J rho = sum L rho L^dagger`, so `E[N^k] = Tr rho_k`.
pub fn jump_count_moments(model: &LindbladModel, rho0: &DensityOperator, t: f64) -> Result<JumpCountMoments> {
    ensure_dims(model, rho0)?;
    let d = model.dim();
    let n = d * d;
    let l = model.liouvillian();
    let j = model.jump_superoperator();
    let mut gen = ComplexMatrix::zeros(3 * n, 3 * n);
    for b in 0..3 {
        gen.view_mut((b * n, b * n), (n, n)).copy_from(&l);
    }
    gen.view_mut((n, 0), (n, n)).copy_from(&j);
    gen.view_mut((2 * n, 0), (n, n)).copy_from(&j);
    gen.view_mut((2 * n, n), (n, n)).copy_from(&(&j * c64(2.0, 0.0)));
    let mut v0 = ComplexVector::zeros(3 * n);
    v0.rows_mut(0, n).copy_from(&vec_of(rho0.matrix()));
    let v = linalg::expm(&(gen * c64(t, 0.0)))? * v0;
    let tr = |b: usize| unvec(&v.rows(b * n, n).into_owned(), d).trace().re;
    let (norm, mean, second) = (tr(0), tr(1), tr(2));
    if (norm - 1.0).abs() > LINDBLAD_TRACE_TOL {
        return Err(Error::IntegratorDiverged(format!("trace drifted to {norm}")));
    }
    Ok(JumpCountMoments { mean: mean.max(0.0), second: second.max(0.0) })
}

/// Largest deviation of `sum V^dagger V` from the identity.
pub fn kraus_completeness_defect(ops: &[ComplexMatrix]) -> f64 {
    let d = ops[0].nrows();
    let sum = ops.iter().fold(ComplexMatrix::zeros(d, d), |acc, v| acc + v.adjoint() * v);
    max_abs(&(sum - ComplexMatrix::identity(d, d)))
}

//! Distances between states and observable statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{DensityOperator, StateVector};
use crate::{ComplexMatrix, ComplexVector, C64};

/// Tolerance on the sum of a probability vector.
pub const DISTRIBUTION_TOL: f64 = 1e-10;

/// A pure or mixed state, for functions that accept either.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityOperator),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(psi: &'a StateVector) -> Self {
        StateRef::Pure(psi)
    }
}

impl<'a> From<&'a DensityOperator> for StateRef<'a> {
    fn from(rho: &'a DensityOperator) -> Self {
        StateRef::Mixed(rho)
    }
}

impl StateRef<'_> {
    /// `<O>` in the normalized state.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        match self {
            StateRef::Pure(psi) => {
                let n2 = psi.norm().powi(2);
                Ok(psi.expectation(op)? / n2)
            }
            StateRef::Mixed(rho) => {
                if op.nrows() != rho.dim() {
                    return Err(Error::Shape(format!("operator of dim {} on state of dim {}", op.nrows(), rho.dim())));
                }
                Ok(rho.expectation(op) / rho.trace())
            }
        }
    }

    pub fn system_dim(&self) -> usize {
        match self {
            StateRef::Pure(psi) => psi.system_dim(),
            StateRef::Mixed(rho) => rho.dim(),
        }
    }
}

/// `(Tr|sqrt(rho1) sqrt(rho2)|)`, the sum of singular values, plus the
/// optimal unitary aligning the two square roots.
fn root_overlap(
    a: &DensityOperator,
    b: &DensityOperator,
) -> Result<(f64, ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    for rho in [a, b] {
        if !rho.is_trace_normalized() {
            return Err(Error::NotNormalized { trace: rho.trace() });
        }
    }
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("states of dim {} and {}", a.dim(), b.dim())));
    }
    let ra = linalg::sqrtm_psd(a.matrix())?;
    let rb = linalg::sqrtm_psd(b.matrix())?;
    let svd = (&ra * &rb).svd(true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^dagger"));
    let align = v_t.adjoint() * u.adjoint();
    Ok((svd.singular_values.sum(), ra, rb, align))
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2`.
///
/// The trace norm is evaluated as the sum of singular values of
/// `sqrt(rho1) sqrt(rho2)`, which equals the nested square root exactly.
pub fn fidelity(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    let (s, ..) = root_overlap(a, b)?;
    Ok((s * s).clamp(0.0, 1.0))
}

/// Squared Bures distance `2 - 2 sqrt(F)`, computed as a minimized Frobenius
/// distance between square roots so it stays accurate when `F` is near one.
fn bures_distance_sq(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    let (_, ra, rb, align) = root_overlap(a, b)?;
    let diff = ra - rb * align;
    Ok(diff.iter().map(|z| z.norm_sqr()).sum::<f64>().clamp(0.0, 2.0))
}

/// Bures angle `arccos(sqrt(F))` in `[0, pi/2]`.
pub fn bures_angle(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    Ok(angle_from_distance_sq(bures_distance_sq(a, b)?))
}

/// `1 - sqrt(F) = 2 sin^2(L_D / 2)`, without cancellation.
pub fn one_minus_sqrt_fidelity(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    Ok(bures_distance_sq(a, b)? / 2.0)
}

fn angle_from_distance_sq(d2: f64) -> f64 {
    2.0 * (d2.sqrt() / 2.0).min(1.0).asin()
}

/// `|<psi~|phi~>|` for the normalized vectors.
pub fn overlap_modulus(psi: &StateVector, phi: &StateVector) -> f64 {
    (psi.inner(phi).norm() / (psi.norm() * phi.norm())).min(1.0)
}

/// `|<psi~|phi~>|^2`.
pub fn fidelity_pure(psi: &StateVector, phi: &StateVector) -> f64 {
    overlap_modulus(psi, phi).powi(2)
}

/// Squared distance `min_theta |psi~ - e^{i theta} phi~|^2 = 2 - 2|<psi~|phi~>|`.
fn pure_distance_sq(psi: &StateVector, phi: &StateVector) -> f64 {
    let a: ComplexVector = psi.amplitudes() / crate::c64(psi.norm(), 0.0);
    let b: ComplexVector = phi.amplitudes() / crate::c64(phi.norm(), 0.0);
    let ov = b.dotc(&a);
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { crate::c64(1.0, 0.0) };
    (a - b * phase).norm_squared()
}

/// Bures angle `arccos|<psi~|phi~>|` between pure states, accurate near zero.
pub fn bures_angle_pure(psi: &StateVector, phi: &StateVector) -> f64 {
    angle_from_distance_sq(pure_distance_sq(psi, phi))
}

/// `1 - |<psi~|phi~>|`, accurate near zero.
pub fn one_minus_overlap_pure(psi: &StateVector, phi: &StateVector) -> f64 {
    pure_distance_sq(psi, phi) / 2.0
}

/// Mean and standard deviation of a Hermitian observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableStats {
    pub mean: f64,
    pub std: f64,
}

impl ObservableStats {
    pub fn new(mean: f64, std: f64) -> Self {
        Self { mean, std }
    }
}

/// `<C>` and `sqrt(<C^2> - <C>^2)` in the normalized state.
pub fn observable_stats<'a>(c: &ComplexMatrix, state: impl Into<StateRef<'a>>) -> Result<ObservableStats> {
    linalg::ensure_hermitian(c)?;
    let state = state.into();
    let mean = state.expectation(c)?.re;
    let second = state.expectation(&(c * c))?.re;
    Ok(ObservableStats { mean, std: (second - mean * mean).max(0.0).sqrt() })
}

/// `<O>` and `sqrt(<O^dagger O> - |<O>|^2)` for an arbitrary operator.
pub fn generalized_mean_std<'a>(o: &ComplexMatrix, state: impl Into<StateRef<'a>>) -> Result<(C64, f64)> {
    let state = state.into();
    let mean = state.expectation(o)?;
    let second = state.expectation(&(o.adjoint() * o))?.re;
    Ok((mean, (second - mean.norm_sqr()).max(0.0).sqrt()))
}

/// `sqrt(<O^dagger O> - |<O>|^2)` for an arbitrary operator.
pub fn generalized_std<'a>(o: &ComplexMatrix, state: impl Into<StateRef<'a>>) -> Result<f64> {
    Ok(generalized_mean_std(o, state)?.1)
}

/// `((m1 - m2) / (s1 + s2))^2`; zero when the means coincide.
pub fn scaled_ratio_sq(a: &ObservableStats, b: &ObservableStats) -> Result<f64> {
    let dm = a.mean - b.mean;
    let denom = a.std + b.std;
    let scale = 1.0 + a.mean.abs() + b.mean.abs();
    if dm.abs() <= 1e-12 * scale {
        return Ok(0.0);
    }
    if denom <= 0.0 {
        return Err(Error::DegenerateObservable);
    }
    Ok((dm / denom).powi(2))
}

/// `[ratio^2 + 1]^{-1/2}`, the lower bound on the root fidelity implied by
/// the observable statistics at two times.
pub fn hellinger_rhs(a: &ObservableStats, b: &ObservableStats) -> Result<f64> {
    Ok(1.0 / (scaled_ratio_sq(a, b)? + 1.0).sqrt())
}

/// Checks nonnegativity and unit sum.
pub fn validate_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::NotDistribution("empty".into()));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < -1e-12) {
        return Err(Error::NotDistribution(format!("entry {x} is negative or not finite")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::NotDistribution(format!("entries sum to {s}")));
    }
    Ok(())
}

/// Renyi divergence `D_alpha(P||Q)`; `alpha = 1` gives the Kullback-Leibler
/// divergence. Returns `+inf` when the support condition fails.
pub fn renyi(alpha: f64, p: &[f64], q: &[f64]) -> Result<f64> {
    validate_distribution(p)?;
    validate_distribution(q)?;
    if p.len() != q.len() {
        return Err(Error::Shape(format!("distributions of length {} and {}", p.len(), q.len())));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::BadParameter(format!("Renyi order {alpha} must be positive and finite")));
    }
    let pairs = p.iter().zip(q).map(|(&a, &b)| (a.max(0.0), b.max(0.0)));
    if alpha == 1.0 {
        let mut kl = 0.0;
        for (a, b) in pairs {
            if a > 0.0 {
                if b == 0.0 {
                    return Ok(f64::INFINITY);
                }
                kl += a * (a / b).ln();
            }
        }
        return Ok(kl.max(0.0));
    }
    let mut s = 0.0;
    for (a, b) in pairs {
        if a > 0.0 {
            if b == 0.0 && alpha > 1.0 {
                return Ok(f64::INFINITY);
            }
            if b > 0.0 {
                s += a.powf(alpha) * b.powf(1.0 - alpha);
            }
        }
    }
    if s <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((s.ln() / (alpha - 1.0)).max(0.0))
}

/// `D_{1/2}(P||Q) = -2 ln sum sqrt(P Q)`.
pub fn renyi_half(p: &[f64], q: &[f64]) -> Result<f64> {
    renyi(0.5, p, q)
}

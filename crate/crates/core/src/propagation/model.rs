use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, kron};
use crate::state::DensityOperator;
use crate::{c64, ComplexMatrix};

/// `t -> (H(t), Gamma(t))`.
pub type GeneratorFn = Arc<dyn Fn(f64) -> (ComplexMatrix, ComplexMatrix) + Send + Sync>;

/// Default resolution of the time-ordered integrator.
pub const DEFAULT_STEPS_PER_UNIT_TIME: f64 = 1000.0;

fn ensure_psd_gamma(gamma: &ComplexMatrix) -> Result<()> {
    let eig = linalg::herm_eig(gamma)?;
    let scale = eig.max().abs().max(1.0);
    if eig.min() < linalg::PSD_CLAMP * scale {
        return Err(Error::NonPositiveGamma { min_eigenvalue: eig.min() });
    }
    Ok(())
}

fn validate_pair(h: &ComplexMatrix, gamma: &ComplexMatrix) -> Result<()> {
    linalg::ensure_hermitian(h)?;
    linalg::ensure_hermitian(gamma)?;
    if h.nrows() != gamma.nrows() {
        return Err(Error::Shape(format!("H is {0}x{0} but Gamma is {1}x{1}", h.nrows(), gamma.nrows())));
    }
    ensure_psd_gamma(gamma)
}

/// Generator `H - i Gamma` of closed non-Hermitian dynamics, optionally
/// time dependent.
#[derive(Clone)]
pub struct NonHermitianModel {
    h: ComplexMatrix,
    gamma: ComplexMatrix,
    time_dependence: Option<GeneratorFn>,
    steps_per_unit_time: f64,
}

impl fmt::Debug for NonHermitianModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonHermitianModel")
            .field("h", &self.h)
            .field("gamma", &self.gamma)
            .field("time_dependent", &self.time_dependence.is_some())
            .field("steps_per_unit_time", &self.steps_per_unit_time)
            .finish()
    }
}

impl NonHermitianModel {
    pub fn new(h: ComplexMatrix, gamma: ComplexMatrix) -> Result<Self> {
        validate_pair(&h, &gamma)?;
        Ok(Self {
            h: linalg::hermitian_part(&h),
            gamma: linalg::hermitian_part(&gamma),
            time_dependence: None,
            steps_per_unit_time: DEFAULT_STEPS_PER_UNIT_TIME,
        })
    }

    /// `Gamma = 0`.
    pub fn hermitian(h: ComplexMatrix) -> Result<Self> {
        let n = h.nrows();
        Self::new(h, ComplexMatrix::zeros(n, n))
    }

    /// Time-dependent generator. `h()` and `gamma()` report the values at
    /// `t = 0`; the pair is re-validated at every time it is sampled.
    pub fn time_dependent<F>(generator: F) -> Result<Self>
    where
        F: Fn(f64) -> (ComplexMatrix, ComplexMatrix) + Send + Sync + 'static,
    {
        let (h, gamma) = generator(0.0);
        let mut model = Self::new(h, gamma)?;
        model.time_dependence = Some(Arc::new(generator));
        Ok(model)
    }

    pub fn with_steps_per_unit_time(mut self, steps: f64) -> Result<Self> {
        if !(steps.is_finite() && steps >= 1.0) {
            return Err(Error::BadParameter(format!("steps per unit time {steps} must be >= 1")));
        }
        self.steps_per_unit_time = steps;
        Ok(self)
    }

    pub fn steps_per_unit_time(&self) -> f64 {
        self.steps_per_unit_time
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn gamma(&self) -> &ComplexMatrix {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn is_time_dependent(&self) -> bool {
        self.time_dependence.is_some()
    }

    /// `(H(t), Gamma(t))`.
    pub fn parts_at(&self, t: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        match &self.time_dependence {
            None => Ok((self.h.clone(), self.gamma.clone())),
            Some(g) => {
                let (h, gamma) = g(t);
                linalg::ensure_hermitian(&h)?;
                linalg::ensure_hermitian(&gamma)?;
                if h.nrows() != self.dim() || gamma.nrows() != self.dim() {
                    return Err(Error::Shape(format!("generator changed dimension at t = {t}")));
                }
                Ok((h, gamma))
            }
        }
    }

    /// `H - i Gamma` (at `t = 0` for time-dependent models).
    pub fn generator(&self) -> ComplexMatrix {
        &self.h - &self.gamma * c64(0.0, 1.0)
    }

    pub fn generator_at(&self, t: f64) -> Result<ComplexMatrix> {
        let (h, gamma) = self.parts_at(t)?;
        Ok(h - gamma * c64(0.0, 1.0))
    }

    /// Smallest eigenvalue of `H`.
    pub fn ground_energy(&self) -> f64 {
        linalg::herm_eig(&self.h).expect("validated Hermitian").min()
    }
}

/// Lindblad dynamics `d rho/dt = -i[H_S, rho] + sum_m (L rho L^dagger - {L^dagger L, rho}/2)`
/// with time-independent `H_S` and jump operators.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    h_s: ComplexMatrix,
    jumps: Vec<ComplexMatrix>,
}

impl LindbladModel {
    pub fn new(h_s: ComplexMatrix, jumps: Vec<ComplexMatrix>) -> Result<Self> {
        linalg::ensure_hermitian(&h_s)?;
        let d = h_s.nrows();
        for (m, l) in jumps.iter().enumerate() {
            if l.nrows() != d || l.ncols() != d {
                return Err(Error::Shape(format!("jump {m} is {}x{}, system is {d}x{d}", l.nrows(), l.ncols())));
            }
            if !l.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::BadParameter(format!("jump {m} has non-finite entries")));
            }
        }
        Ok(Self { h_s: linalg::hermitian_part(&h_s), jumps })
    }

    pub fn h_s(&self) -> &ComplexMatrix {
        &self.h_s
    }

    pub fn jumps(&self) -> &[ComplexMatrix] {
        &self.jumps
    }

    pub fn dim(&self) -> usize {
        self.h_s.nrows()
    }

    pub fn channels(&self) -> usize {
        self.jumps.len()
    }

    /// `sum_m L_m^dagger L_m`.
    pub fn dissipation_rate_operator(&self) -> ComplexMatrix {
        let d = self.dim();
        let sum = self.jumps.iter().fold(ComplexMatrix::zeros(d, d), |acc, l| acc + l.adjoint() * l);
        linalg::hermitian_part(&sum)
    }

    /// `H_eff = H_S - (i/2) sum_m L_m^dagger L_m`.
    pub fn effective_hamiltonian(&self) -> ComplexMatrix {
        &self.h_s - self.dissipation_rate_operator() * c64(0.0, 0.5)
    }

    /// Closed model `(H_S, sum L^dagger L / 2)` generating no-jump evolution.
    pub fn no_jump_model(&self) -> NonHermitianModel {
        NonHermitianModel::new(self.h_s.clone(), self.dissipation_rate_operator() * c64(0.5, 0.0))
            .expect("H_S is Hermitian and sum L^dagger L is PSD")
    }

    /// Smallest eigenvalue of `H_S`.
    pub fn ground_energy(&self) -> f64 {
        linalg::herm_eig(&self.h_s).expect("validated Hermitian").min()
    }

    /// Dynamical activity rate `Tr[sum L^dagger L rho]`.
    pub fn activity_rate(&self, rho: &DensityOperator) -> f64 {
        rho.expectation(&self.dissipation_rate_operator()).re
    }

    /// Jump superoperator `rho -> sum L rho L^dagger` on column-stacked `vec(rho)`.
    pub fn jump_superoperator(&self) -> ComplexMatrix {
        let d = self.dim();
        self.jumps.iter().fold(ComplexMatrix::zeros(d * d, d * d), |acc, l| acc + kron(&l.conjugate(), l))
    }

    /// Liouvillian on column-stacked `vec(rho)`, using
    /// `vec(A X B) = (B^T (x) A) vec(X)`.
    pub fn liouvillian(&self) -> ComplexMatrix {
        let d = self.dim();
        let id = ComplexMatrix::identity(d, d);
        let heff = self.effective_hamiltonian();
        kron(&id, &heff) * c64(0.0, -1.0) + kron(&heff.conjugate(), &id) * c64(0.0, 1.0) + self.jump_superoperator()
    }
}

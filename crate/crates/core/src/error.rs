use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^dagger| = {defect:e})")]
    HermiticityViolation { defect: f64 },

    #[error("matrix exponential overflowed")]
    NumericalOverflow,

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("state norm {norm:e} underflowed; the state has decayed away")]
    NormUnderflow { norm: f64 },

    #[error("trace {trace} is not unit")]
    NotNormalized { trace: f64 },

    #[error("not a probability distribution: {0}")]
    NotDistribution(String),

    #[error("observable has zero spread at both times but distinct means")]
    DegenerateObservable,

    #[error("integrator diverged: {0}")]
    IntegratorDiverged(String),

    #[error("step dt = {dt:e} too large: dt * |H_eff| = {scaled:e} exceeds 0.1")]
    StepTooLarge { dt: f64, scaled: f64 },

    #[error("generator parts do not commute (max |[H, G]| = {norm:e})")]
    CommutatorViolation { norm: f64 },

    #[error("decay operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NonPositiveGamma { min_eigenvalue: f64 },

    #[error("bound requires a time-independent generator")]
    TimeDependent,

    #[error("integrated spread {integral} exceeds pi/2")]
    WindowExceeded { integral: f64 },

    #[error("fidelity exceeds survival probability (Fid/Z = {ratio})")]
    DomainError { ratio: f64 },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

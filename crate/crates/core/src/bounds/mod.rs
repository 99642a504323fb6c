//! Evaluation of the speed limits and uncertainty relations as
//! [`BoundReport`]s. A bound whose preconditions fail is still reported,
//! with `applicable = false` and the failed conditions listed.

pub mod chains;
pub mod classical;
pub mod closed;
pub mod open;
mod report;

pub use chains::{ml_fidelity_chain, mt_phase_chain, MlChainPoint, MtChain, MtChainPoint};
pub use classical::{classical_speed_limit, classical_tur, distribution_stats};
pub use closed::{
    commutator_check, energy_time, lambda_ml, lambda_mt, ml_terms, mt_integral, qsl_ml, qsl_mt, tur_ml, tur_mt,
    MlTerms, MtIntegral, COMMUTATOR_TOL, DEFAULT_FD_STEP,
};
pub use open::{
    lambda_ml_open, lambda_mt_open, open_ml_terms, open_mt_terms, qsl_ml_open, qsl_mt_open, tur_ml_open, tur_mt_open,
    EnsembleSpec, OpenMlTerms, OpenMtTerms, OpenObservable,
};
pub use report::{BoundKind, BoundReport, Condition, GroundEnergy, SLACK_TOL};

//! Quantum speed limits and thermodynamic uncertainty relations for
//! dynamics generated by non-Hermitian Hamiltonians.
//!
//! The crate simulates closed non-Hermitian evolution `i d|psi>/dt = (H - iG)|psi>`,
//! Lindblad dynamics and its quantum-jump unraveling, and evaluates the
//! Margolus-Levitin and Mandelstam-Tamm type fidelity bounds, speed limits and
//! uncertainty relations for them as structured [`bounds::BoundReport`]s.
//!
//! The linear-algebra kernel ([`linalg`]) is generic over the real scalar;
//! everything above it works in double precision through the aliases below.

// `!(x >= y)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod propagation;
pub mod quadrature;
pub mod schema;
pub mod state;
mod sum;

pub use num_complex::Complex;

pub use error::{Error, Result};

/// Working real scalar.
pub type Real = f64;
/// Working complex scalar.
pub type C64 = Complex<f64>;
/// Dense complex square matrix used for every operator.
pub type ComplexMatrix = linalg::CMat<f64>;
/// Dense complex column vector.
pub type ComplexVector = linalg::CVec<f64>;

pub use bounds::{BoundKind, BoundReport, Condition};
pub use models::ClassicalMarkovModel;
pub use propagation::{LindbladModel, NonHermitianModel, PseudoDensity, Trajectory};
pub use state::{DensityOperator, Layout, StateVector};

/// `re + i im`.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

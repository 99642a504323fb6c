//! Pure and mixed state representations.
//!
//! A [`StateVector`] may be unnormalized: non-Hermitian evolution shrinks it
//! and the norm is physically meaningful (survival amplitude). It either lives
//! on the system alone or on `system (x) ancilla` after purification.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, HermitianEigen, Keep};
use crate::{c64, ComplexMatrix, ComplexVector, C64};

/// States with norm below this are treated as decayed away.
pub const NORM_FLOOR: f64 = 1e-14;
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Eigenvalues at or below this are dropped when purifying.
pub const RANK_CUTOFF: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Flat,
    Bipartite { system: usize, ancilla: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: ComplexVector,
    layout: Layout,
}

impl StateVector {
    pub fn new(amps: ComplexVector) -> Result<Self> {
        Self::with_layout(amps, Layout::Flat)
    }

    pub fn from_components(amps: &[C64]) -> Result<Self> {
        Self::new(ComplexVector::from_column_slice(amps))
    }

    pub fn bipartite(amps: ComplexVector, system: usize, ancilla: usize) -> Result<Self> {
        Self::with_layout(amps, Layout::Bipartite { system, ancilla })
    }

    pub fn with_layout(amps: ComplexVector, layout: Layout) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Shape("empty state vector".into()));
        }
        if let Layout::Bipartite { system, ancilla } = layout {
            if system * ancilla != amps.len() {
                return Err(Error::Shape(format!("{} amplitudes do not factor as {system} x {ancilla}", amps.len())));
            }
        }
        let norm = amps.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::NormUnderflow { norm });
        }
        Ok(Self { amps, layout })
    }

    /// Computational basis vector `|k>`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Shape(format!("basis index {k} out of range for dim {dim}")));
        }
        let mut v = ComplexVector::zeros(dim);
        v[k] = c64(1.0, 0.0);
        Self::new(v)
    }

    /// Equal-weight superposition of all basis states.
    pub fn uniform(dim: usize) -> Result<Self> {
        let a = 1.0 / (dim as f64).sqrt();
        Self::new(ComplexVector::from_element(dim, c64(a, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn system_dim(&self) -> usize {
        match self.layout {
            Layout::Flat => self.amps.len(),
            Layout::Bipartite { system, .. } => system,
        }
    }

    fn ancilla_dim(&self) -> usize {
        match self.layout {
            Layout::Flat => 1,
            Layout::Bipartite { ancilla, .. } => ancilla,
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> ComplexVector {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_NORM_TOL
    }

    pub fn normalize(&self) -> Result<(StateVector, f64)> {
        normalize(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Amplitudes arranged as a `system x ancilla` grid.
    fn grid(&self) -> ComplexMatrix {
        DMatrix::from_row_slice(self.system_dim(), self.ancilla_dim(), self.amps.as_slice())
    }

    /// `(op (x) I_A)|psi>` as raw amplitudes (no norm check).
    pub fn apply_local_raw(&self, op: &ComplexMatrix) -> Result<ComplexVector> {
        if op.nrows() != self.system_dim() || op.ncols() != self.system_dim() {
            return Err(Error::Shape(format!(
                "operator of dim {} applied to system of dim {}",
                op.nrows(),
                self.system_dim()
            )));
        }
        let out = op * self.grid();
        let t = out.transpose();
        Ok(ComplexVector::from_column_slice(t.as_slice()))
    }

    /// `(op (x) I_A)|psi>`, keeping the layout.
    pub fn apply_local(&self, op: &ComplexMatrix) -> Result<StateVector> {
        Self::with_layout(self.apply_local_raw(op)?, self.layout)
    }

    /// `<psi|op (x) I_A|psi>` (not divided by the norm).
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        let v = self.apply_local_raw(op)?;
        Ok(self.amps.dotc(&v))
    }

    /// `|psi><psi|` on the full space.
    pub fn projector(&self) -> ComplexMatrix {
        &self.amps * self.amps.adjoint()
    }

    /// Unit-trace reduced state on the system factor.
    pub fn reduced(&self) -> Result<DensityOperator> {
        match self.layout {
            Layout::Flat => DensityOperator::from_pure(self),
            Layout::Bipartite { .. } => reduced_density(self),
        }
    }
}

/// `psi / |psi|` together with `|psi|`.
pub fn normalize(psi: &StateVector) -> Result<(StateVector, f64)> {
    let norm = psi.norm();
    if norm <= NORM_FLOOR {
        return Err(Error::NormUnderflow { norm });
    }
    let unit = psi.amps.map(|z| z / norm);
    Ok((StateVector { amps: unit, layout: psi.layout }, norm))
}

/// Hermitian positive semidefinite operator, usually of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    trace_normalized: bool,
}

impl DensityOperator {
    /// Validated unit-trace density operator.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::unnormalized(matrix)?;
        if !rho.trace_normalized {
            return Err(Error::NotNormalized { trace: rho.trace() });
        }
        Ok(rho)
    }

    /// Hermitian PSD operator whose trace may differ from one.
    pub fn unnormalized(matrix: ComplexMatrix) -> Result<Self> {
        linalg::ensure_hermitian(&matrix)?;
        let matrix = linalg::hermitian_part(&matrix);
        let eig = linalg::herm_eig(&matrix)?;
        let scale = eig.max().abs().max(1.0);
        if eig.min() < linalg::PSD_CLAMP * scale {
            return Err(Error::NotPsd { min_eigenvalue: eig.min() });
        }
        let trace = linalg::trace(&matrix).re;
        Ok(Self { trace_normalized: (trace - 1.0).abs() <= TRACE_TOL, matrix })
    }

    /// `|psi~><psi~|` for the normalized vector (on the full space of `psi`).
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let (unit, _) = normalize(psi)?;
        Self::new(unit.projector())
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim, dim) / c64(dim as f64, 0.0))
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let d = ComplexVector::from_iterator(probabilities.len(), probabilities.iter().map(|&p| c64(p, 0.0)));
        Self::new(ComplexMatrix::from_diagonal(&d))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn is_trace_normalized(&self) -> bool {
        self.trace_normalized
    }

    /// Divides by the trace.
    pub fn normalized(&self) -> Result<DensityOperator> {
        let tr = self.trace();
        if tr <= NORM_FLOOR * NORM_FLOOR {
            return Err(Error::NormUnderflow { norm: tr.max(0.0).sqrt() });
        }
        Ok(Self { matrix: self.matrix.map(|z| z / tr), trace_normalized: true })
    }

    /// `Tr[op rho]`.
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        (op * &self.matrix).trace()
    }

    pub fn eigen(&self) -> HermitianEigen<f64> {
        linalg::herm_eig(&self.matrix).expect("density operator is Hermitian by construction")
    }

    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Lifts `rho` to `sum_l sqrt(p_l) |psi_l> (x) |a_l>` on `S (x) A`.
///
/// Eigenvalues are taken in descending order and mapped onto the ancilla's
/// computational basis; eigenvalues `<= RANK_CUTOFF` are dropped so the
/// ancilla dimension equals the numerical rank.
pub fn purify(rho: &DensityOperator) -> Result<StateVector> {
    if !rho.is_trace_normalized() {
        return Err(Error::NotNormalized { trace: rho.trace() });
    }
    let eig = rho.eigen();
    let ds = rho.dim();
    let kept: Vec<usize> = (0..ds).rev().filter(|&l| eig.values[l] > RANK_CUTOFF).collect();
    let da = kept.len().max(1);
    let mut amps = ComplexVector::zeros(ds * da);
    for (a, &l) in kept.iter().enumerate() {
        let w = eig.values[l].sqrt();
        for s in 0..ds {
            amps[s * da + a] = eig.vectors[(s, l)] * w;
        }
    }
    StateVector::bipartite(amps, ds, da)
}

/// `Tr_A[|psi~><psi~|]` for a purified state.
pub fn reduced_density(psi: &StateVector) -> Result<DensityOperator> {
    let Layout::Bipartite { system, ancilla } = psi.layout() else {
        return Err(Error::Shape("reduced density needs a system (x) ancilla layout".into()));
    };
    let (unit, _) = normalize(psi)?;
    let full = unit.projector();
    let reduced = linalg::partial_trace(&full, system, ancilla, Keep::System)?;
    DensityOperator::new(reduced)
}

//! Dense complex linear algebra kernel.
//!
//! Everything here is generic over the real scalar `T` (`f32` or `f64`);
//! the rest of the crate uses the `f64` aliases exported at the crate root.
//! Storage, the Hermitian eigensolver and the Padé exponential come from
//! `nalgebra`; spectral functions, partial traces and tolerance policy live
//! here.

use std::cmp::Ordering;

use nalgebra::{ComplexField, DMatrix, DVector, RealField};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

/// Relative Hermiticity tolerance: `max|A - A^dagger| <= tol * (1 + max|A|)`.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues in `[PSD_REJECT, 0)` are clamped to zero by PSD routines.
pub const PSD_CLAMP: f64 = -1e-10;
/// Eigenvalues below this are reported as `NotPsd`.
pub const PSD_REJECT: f64 = -1e-8;

/// Real scalar the kernel can be instantiated with.
pub trait Real: RealField + Copy {}
impl<T: RealField + Copy> Real for T {}

#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    nalgebra::try_convert::<T, f64>(x).unwrap_or(f64::NAN)
}

#[inline]
fn cplx<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

#[inline]
fn modulus<T: Real>(z: &Complex<T>) -> T {
    <Complex<T> as ComplexField>::modulus(*z)
}

#[inline]
fn finite<T: Real>(z: &Complex<T>) -> bool {
    <Complex<T> as ComplexField>::is_finite(z)
}

/// Effective Hermiticity tolerance for scalar `T`; never tighter than a few
/// hundred ulps.
fn herm_tol<T: Real>() -> T {
    let eps = T::default_epsilon() * lit(64.0);
    lit::<T>(HERMITICITY_TOL).max(eps)
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::<T>::identity(n, n)
}

pub fn max_abs<T: Real>(a: &CMat<T>) -> T {
    a.iter().fold(T::zero(), |m, z| m.max(modulus(z)))
}

pub fn trace<T: Real>(a: &CMat<T>) -> Complex<T> {
    a.diagonal().iter().fold(Complex::new(T::zero(), T::zero()), |s, z| s + z)
}

pub fn commutator<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a * b - b * a
}

/// `max |A[i,j] - conj(A[j,i])|`.
pub fn hermiticity_defect<T: Real>(a: &CMat<T>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            worst = worst.max(modulus(&(a[(i, j)] - a[(j, i)].conj())));
        }
    }
    worst
}

pub fn is_hermitian<T: Real>(a: &CMat<T>) -> bool {
    a.is_square() && hermiticity_defect(a) <= herm_tol::<T>() * (T::one() + max_abs(a))
}

fn is_anti_hermitian<T: Real>(a: &CMat<T>) -> bool {
    let n = a.nrows();
    let tol = herm_tol::<T>() * (T::one() + max_abs(a));
    for i in 0..n {
        for j in i..n {
            if modulus(&(a[(i, j)] + a[(j, i)].conj())) > tol {
                return false;
            }
        }
    }
    true
}

pub fn ensure_square<T: Real>(a: &CMat<T>) -> Result<()> {
    if a.is_square() && a.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::Shape(format!("expected a non-empty square matrix, got {}x{}", a.nrows(), a.ncols())))
    }
}

pub fn ensure_hermitian<T: Real>(a: &CMat<T>) -> Result<()> {
    ensure_square(a)?;
    if is_hermitian(a) {
        Ok(())
    } else {
        Err(Error::HermiticityViolation { defect: to_f64(hermiticity_defect(a)) })
    }
}

/// `(A + A^dagger) / 2`.
pub fn hermitian_part<T: Real>(a: &CMat<T>) -> CMat<T> {
    let half = cplx(lit::<T>(0.5));
    (a + a.adjoint()).map(|z| z * half)
}

/// Operator (spectral) norm, the largest singular value.
pub fn op_norm<T: Real>(a: &CMat<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    a.singular_values().iter().copied().fold(T::zero(), T::max)
}

/// Spectral decomposition `A = V diag(values) V^dagger` with ascending values.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMat<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(values)) V^dagger`.
    pub fn map_complex<F: Fn(T) -> Complex<T>>(&self, f: F) -> CMat<T> {
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let s = f(v);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= s);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> CMat<T> {
        self.map_complex(|v| cplx(f(v)))
    }

    pub fn reconstruct(&self) -> CMat<T> {
        self.map(|v| v)
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }
}

pub fn herm_eig<T: Real>(a: &CMat<T>) -> Result<HermitianEigen<T>> {
    ensure_hermitian(a)?;
    let eig = hermitian_part(a).symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(Ordering::Equal));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::<T>::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Matrix exponential.
///
/// Hermitian and anti-Hermitian inputs go through the eigendecomposition so
/// that e.g. unitaries stay unitary to rounding; everything else uses Padé
/// scaling-and-squaring.
pub fn expm<T: Real>(a: &CMat<T>) -> Result<CMat<T>> {
    ensure_square(a)?;
    let out = if is_hermitian(a) {
        herm_eig(a)?.map(|l| l.exp())
    } else if is_anti_hermitian(a) {
        // A = -iK with K = iA Hermitian.
        let k = a.map(|z| z * Complex::new(T::zero(), T::one()));
        herm_eig(&k)?.map_complex(|kappa| Complex::new(kappa.cos(), -kappa.sin()))
    } else {
        a.clone().exp()
    };
    if out.iter().all(finite) {
        Ok(out)
    } else {
        Err(Error::NumericalOverflow)
    }
}

fn psd_reject<T: Real>(scale: T) -> T {
    let eps_floor = T::default_epsilon() * lit(1e3) * (T::one() + scale);
    -(lit::<T>(-PSD_REJECT).max(eps_floor))
}

/// Validates a spectrum as PSD and returns it with negative noise clamped.
pub(crate) fn clamp_psd_spectrum<T: Real>(values: &[T]) -> Result<Vec<T>> {
    let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let min = values.iter().copied().fold(T::max_value().unwrap(), T::min);
    if min < psd_reject(scale) {
        return Err(Error::NotPsd { min_eigenvalue: to_f64(min) });
    }
    Ok(values.iter().map(|&v| v.max(T::zero())).collect())
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues within a few ulps of zero (relative to the largest) are set to
/// exactly zero so that rank-deficient inputs keep their rank.
pub fn sqrtm_psd<T: Real>(a: &CMat<T>) -> Result<CMat<T>> {
    let eig = herm_eig(a)?;
    let clamped = clamp_psd_spectrum(&eig.values)?;
    let top = clamped.iter().copied().fold(T::zero(), T::max);
    let floor = top * T::default_epsilon() * lit(64.0);
    let eig = HermitianEigen { values: clamped, vectors: eig.vectors };
    Ok(eig.map(|v| if v <= floor { T::zero() } else { v.sqrt() }))
}

/// Which factor of a bipartite space survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    System,
    Ancilla,
}

/// Partial trace of an operator on `S (x) A` with `dim S = ds`, `dim A = da`.
/// Basis ordering is the Kronecker one: index `s * da + a`.
pub fn partial_trace<T: Real>(m: &CMat<T>, ds: usize, da: usize, keep: Keep) -> Result<CMat<T>> {
    ensure_square(m)?;
    if ds == 0 || da == 0 || m.nrows() != ds * da {
        return Err(Error::Shape(format!("partial trace of a {}x{} matrix over {ds} x {da}", m.nrows(), m.ncols())));
    }
    let zero = Complex::new(T::zero(), T::zero());
    Ok(match keep {
        Keep::System => {
            CMat::<T>::from_fn(ds, ds, |s, t| (0..da).fold(zero, |acc, a| acc + m[(s * da + a, t * da + a)]))
        }
        Keep::Ancilla => {
            CMat::<T>::from_fn(da, da, |a, b| (0..ds).fold(zero, |acc, s| acc + m[(s * da + a, s * da + b)]))
        }
    })
}

pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

/// Common eigenbasis of two commuting Hermitian matrices.
///
/// Diagonalizes `h`, then resolves each degenerate eigenspace with `g`.
/// Returns `(vectors, h_values, g_values)`; the caller is responsible for
/// having checked `[h, g] = 0`.
pub fn joint_eigenbasis<T: Real>(h: &CMat<T>, g: &CMat<T>) -> Result<(CMat<T>, Vec<T>, Vec<T>)> {
    ensure_hermitian(g)?;
    let eig = herm_eig(h)?;
    let n = eig.dim();
    if g.nrows() != n {
        return Err(Error::Shape("joint eigenbasis of mismatched operators".into()));
    }
    let spread = eig.max().abs().max(eig.min().abs());
    let tol = lit::<T>(1e-9) * (T::one() + spread);
    let mut vectors = eig.vectors.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.values[end] - eig.values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let projected = hermitian_part(&(block.adjoint() * g * &block));
            let inner = herm_eig(&projected)?;
            let rotated = block * inner.vectors;
            vectors.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }
    let gd = vectors.adjoint() * g * &vectors;
    let g_values = (0..n).map(|i| gd[(i, i)].re).collect();
    Ok((vectors, eig.values, g_values))
}

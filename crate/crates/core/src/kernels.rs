//! Scalar abstraction and elementary matrix kernels.
//!
//! Matrices are dense `nalgebra::DMatrix` values. Templates are always real,
//! data matrices are real (`f64`) or complex (`Complex64`). Every reduction
//! accumulates in `f64`.

use nalgebra::{Cholesky, ComplexField, DMatrix, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Field of the observations: `f64` or `Complex64`.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + Send + Sync + std::fmt::Debug + 'static
{
    const IS_COMPLEX: bool;

    fn from_re(x: f64) -> Self;

    /// Squared modulus `|x|²`.
    fn abs_sq(self) -> f64;

    fn conj(self) -> Self;

    fn re(self) -> f64;

    fn im(self) -> f64;

    fn mul_re(self, c: f64) -> Self;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    #[inline]
    fn from_re(x: f64) -> Self {
        x
    }
    #[inline]
    fn abs_sq(self) -> f64 {
        self * self
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn mul_re(self, c: f64) -> Self {
        self * c
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    #[inline]
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn abs_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::new(self.re, -self.im)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn mul_re(self, c: f64) -> Self {
        Complex64::new(self.re * c, self.im * c)
    }
}

fn check_same_shape<A, B>(context: &'static str, a: &DMatrix<A>, b: &DMatrix<B>) -> Result<()>
where
    A: nalgebra::Scalar,
    B: nalgebra::Scalar,
{
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            context,
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            context,
            expected: a.ncols(),
            found: b.ncols(),
        });
    }
    Ok(())
}

/// Elementwise (Schur) product `A ∘ B`.
pub fn hadamard<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_same_shape("hadamard", a, b)?;
    Ok(a.zip_map(b, |x, y| x * y))
}

/// Applies a real taper to a (real or complex) matrix: `W ∘ A`.
pub fn taper<T: Scalar>(w: &DMatrix<f64>, a: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_same_shape("taper", w, a)?;
    Ok(a.zip_map(w, |x, c| x.mul_re(c)))
}

/// `‖A‖_F² = Σ |a_ij|²`.
pub fn frob_norm_sq<T: Scalar>(a: &DMatrix<T>) -> f64 {
    a.iter().map(|x| x.abs_sq()).sum()
}

/// `Σ_ij m_ij |a_ij|²`, i.e. `‖M' ∘ A‖_F²` where `M = M' ∘ M'`.
pub fn weighted_frob_sq<T: Scalar>(m: &DMatrix<f64>, a: &DMatrix<T>) -> Result<f64> {
    check_same_shape("weighted_frob_sq", m, a)?;
    Ok(m.iter().zip(a.iter()).map(|(w, x)| w * x.abs_sq()).sum())
}

/// `dᵀ (A ∘ A) d`, which equals `tr((diag(d) A)²)` for symmetric `A`.
pub fn diag_quadratic(a: &DMatrix<f64>, d: &[f64]) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "diag_quadratic (square)",
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if d.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            context: "diag_quadratic",
            expected: a.nrows(),
            found: d.len(),
        });
    }
    let p = d.len();
    let mut acc = 0.0;
    for j in 0..p {
        let col = a.column(j);
        let mut inner = 0.0;
        for i in 0..p {
            inner += d[i] * col[i] * col[i];
        }
        acc += inner * d[j];
    }
    Ok(acc)
}

/// Cholesky factorization that fails unless every pivot is real and positive.
///
/// nalgebra takes complex square roots of the pivots, so for complex input a
/// negative pivot yields an imaginary diagonal instead of an error.
pub fn cholesky<T: Scalar>(a: &DMatrix<T>) -> Result<Cholesky<T, Dyn>> {
    let chol = a.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l_dirty();
    let ok = (0..a.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re() > 0.0 && d.re().is_finite() && d.im().abs() <= 1e-12 * d.re()
    });
    if ok {
        Ok(chol)
    } else {
        Err(Error::NotPositiveDefinite)
    }
}

/// Real part of the trace.
pub fn trace_re<T: Scalar>(a: &DMatrix<T>) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re()).sum()
}

/// Real parts of the diagonal.
pub fn real_diagonal<T: Scalar>(a: &DMatrix<T>) -> Vec<f64> {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re()).collect()
}

/// Overwrites the strict lower triangle with the conjugate of the upper one and
/// zeroes the imaginary part of the diagonal, so the result is exactly Hermitian.
pub fn make_hermitian<T: Scalar>(a: &mut DMatrix<T>) {
    let p = a.nrows();
    for j in 0..p {
        a[(j, j)] = T::from_re(a[(j, j)].re());
        for i in (j + 1)..p {
            a[(i, j)] = a[(j, i)].conj();
        }
    }
}

/// Exact (bitwise) Hermitian check.
pub fn is_hermitian<T: Scalar>(a: &DMatrix<T>) -> bool {
    if !a.is_square() {
        return false;
    }
    let p = a.nrows();
    (0..p).all(|j| a[(j, j)].im() == 0.0 && ((j + 1)..p).all(|i| a[(i, j)] == a[(j, i)].conj()))
}

/// Embeds a real matrix into the scalar field `T`.
pub fn lift<T: Scalar>(a: &DMatrix<f64>) -> DMatrix<T> {
    a.map(T::from_re)
}

/// `β A + (1 − β) η I`.
pub fn shrink_to_identity<T: Scalar>(a: &DMatrix<T>, beta: f64, eta: f64) -> DMatrix<T> {
    let mut out = a.map(|x| x.mul_re(beta));
    let target = (1.0 - beta) * eta;
    for i in 0..out.nrows() {
        out[(i, i)] += T::from_re(target);
    }
    out
}

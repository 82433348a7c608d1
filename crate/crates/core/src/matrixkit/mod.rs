//! Dense complex linear algebra used by every other module.
//!
//! Everything here is a pure function of its inputs. The numerically delicate
//! kernels (eigensolvers, matrix functions, the Sylvester solver) live in this
//! module so downstream code never touches a factorization directly.

mod eig;
mod expm;
mod sylvester;

pub use eig::{general_eig, general_eigenvalues, hermitian_eig, EigenDecomposition};
pub use expm::{expm, unitary_propagator};
pub use sylvester::{sylvester_residual, sylvester_solve, sylvester_solve_with};

use nalgebra::ComplexField;

use crate::error::{Error, Result};
use crate::scalar::{all_finite, cr, CMatrix, Real};

/// Reciprocal-condition floor for [`inverse`].
pub const DEFAULT_MIN_RCOND: f64 = 1e-12;
/// Relative hermiticity tolerance for eigensolver inputs.
pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-10;
/// Largest acceptable eigenvector condition number in [`general_eig`].
pub const DEFAULT_MAX_EIGVEC_CONDITION: f64 = 1e12;

/// Operator norm used for smallness parameters and residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormKind {
    /// Largest singular value.
    #[default]
    Spectral,
    /// Frobenius norm; an upper bound on the spectral norm that needs no SVD.
    Frobenius,
}

pub(crate) fn rabs<T: Real>(x: T) -> T {
    if x < T::zero() {
        -x
    } else {
        x
    }
}

pub(crate) fn rmax<T: Real>(a: T, b: T) -> T {
    if a > b {
        a
    } else {
        b
    }
}

pub fn norm<T: Real>(a: &CMatrix<T>, kind: NormKind) -> T {
    match kind {
        NormKind::Spectral => spectral_norm(a),
        NormKind::Frobenius => a.norm(),
    }
}

/// Largest singular value of `a`.
pub fn spectral_norm<T: Real>(a: &CMatrix<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    let fro = a.norm();
    if fro == T::zero() {
        return T::zero();
    }
    match a.clone().try_svd(false, false, T::default_epsilon(), 10_000) {
        Some(svd) => svd.singular_values.iter().copied().fold(T::zero(), rmax),
        None => {
            // Fall back to the top eigenvalue of the Gram matrix.
            let gram = a.adjoint() * a;
            match hermitian_eig(&gram) {
                Ok(e) => e
                    .values
                    .iter()
                    .map(|z| rmax(z.re, T::zero()))
                    .fold(T::zero(), rmax)
                    .sqrt(),
                Err(_) => fro,
            }
        }
    }
}

/// Maximum absolute column sum.
pub fn one_norm<T: Real>(a: &CMatrix<T>) -> T {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.modulus()).fold(T::zero(), |s, x| s + x))
        .fold(T::zero(), rmax)
}

/// Frobenius norm of `a - a†`.
pub fn hermitian_deviation<T: Real>(a: &CMatrix<T>) -> T {
    (a - a.adjoint()).norm()
}

/// True when `‖a − a†‖ ≤ rel_tol · ‖a‖` (Frobenius norms).
pub fn is_hermitian<T: Real>(a: &CMatrix<T>, rel_tol: T) -> bool {
    a.is_square() && hermitian_deviation(a) <= rel_tol * a.norm()
}

/// `(a + a†) / 2`.
pub fn hermitian_part<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    (a + a.adjoint()).scale(T::lit(0.5))
}

/// `‖u†u − I‖` in the Frobenius norm.
pub fn unitarity_deviation<T: Real>(u: &CMatrix<T>) -> T {
    let n = u.ncols();
    (u.adjoint() * u - CMatrix::<T>::identity(n, n)).norm()
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

pub(crate) fn ensure_square<T: Real>(a: &CMatrix<T>) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        })
    }
}

pub(crate) fn ensure_finite<T: Real>(a: &CMatrix<T>) -> Result<()> {
    if all_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn ensure_shape<T: Real>(a: &CMatrix<T>, rows: usize, cols: usize) -> Result<()> {
    if a.nrows() == rows && a.ncols() == cols {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: format!("{rows}x{cols}"),
            found: format!("{}x{}", a.nrows(), a.ncols()),
        })
    }
}

/// Reciprocal condition number in the 1-norm, `1 / (‖A‖₁ ‖A⁻¹‖₁)`.
///
/// Returns zero when the LU factorization reports an exactly singular matrix.
pub fn rcond<T: Real>(a: &CMatrix<T>) -> Result<T> {
    ensure_square(a)?;
    Ok(inverse_and_rcond(a).1)
}

fn inverse_and_rcond<T: Real>(a: &CMatrix<T>) -> (Option<CMatrix<T>>, T) {
    let anorm = one_norm(a);
    if anorm == T::zero() {
        return (None, T::zero());
    }
    match a.clone().lu().try_inverse() {
        Some(inv) if all_finite(&inv) => {
            let r = T::one() / (anorm * one_norm(&inv));
            (Some(inv), r)
        }
        _ => (None, T::zero()),
    }
}

/// Inverse of a square matrix, gated at [`DEFAULT_MIN_RCOND`].
pub fn inverse<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    inverse_with_rcond(a, T::lit(DEFAULT_MIN_RCOND))
}

/// Inverse of a square matrix; fails with `SingularMatrix` when the
/// reciprocal condition number falls below `min_rcond`.
pub fn inverse_with_rcond<T: Real>(a: &CMatrix<T>, min_rcond: T) -> Result<CMatrix<T>> {
    ensure_square(a)?;
    ensure_finite(a)?;
    match inverse_and_rcond(a) {
        (Some(inv), r) if r >= min_rcond => Ok(inv),
        (_, r) => Err(Error::SingularMatrix { rcond: r.as_f64() }),
    }
}

/// Applies a real function to the spectrum of a hermitian matrix.
pub fn hermitian_function<T: Real>(a: &CMatrix<T>, f: impl Fn(T) -> T) -> Result<CMatrix<T>> {
    let e = hermitian_eig(a)?;
    Ok(spectral_reassemble(&e, |z| cr(f(z.re))))
}

pub(crate) fn spectral_reassemble<T: Real>(
    e: &EigenDecomposition<T>,
    f: impl Fn(num_complex::Complex<T>) -> num_complex::Complex<T>,
) -> CMatrix<T> {
    let mut scaled = e.vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        let fj = f(e.values[j]);
        col.iter_mut().for_each(|z| *z *= fj);
    }
    &scaled * e.vectors.adjoint()
}

fn ensure_positive<T: Real>(e: &EigenDecomposition<T>) -> Result<()> {
    let min = e
        .values
        .iter()
        .map(|z| z.re)
        .fold(T::infinity(), |a, b| if b < a { b } else { a });
    if min <= T::zero() {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min.as_f64(),
        });
    }
    Ok(())
}

/// Principal square root of a hermitian positive definite matrix.
pub fn sqrt_posdef<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let e = hermitian_eig(a)?;
    ensure_positive(&e)?;
    Ok(spectral_reassemble(&e, |z| cr(z.re.sqrt())))
}

/// Principal inverse square root `A^{-1/2}` of a hermitian positive definite matrix.
pub fn inv_sqrt_posdef<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let e = hermitian_eig(a)?;
    ensure_positive(&e)?;
    Ok(spectral_reassemble(&e, |z| cr(T::one() / z.re.sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{from_real_rows, from_rows};

    type M = CMatrix<f64>;

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&M::identity(2, 2)), 1.0);
        assert_eq!(spectral_norm(&M::zeros(3, 2)), 0.0);
        // A†A = diag(0, 4) for the nilpotent block.
        let j = from_real_rows::<f64>(&[&[0.0, 2.0], &[0.0, 0.0]]);
        assert!((spectral_norm(&j) - 2.0).abs() < 1e-15);
        assert!((norm(&j, NormKind::Frobenius) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_examples() {
        let a = from_real_rows::<f64>(&[&[2.0, 0.0], &[0.0, 2.0]]);
        let inv = inverse(&a).unwrap();
        assert!((inv - from_real_rows::<f64>(&[&[0.5, 0.0], &[0.0, 0.5]])).norm() < 1e-16);
        let one = from_real_rows::<f64>(&[&[1.0]]);
        assert_eq!(inverse(&one).unwrap()[(0, 0)].re, 1.0);
        let z = M::zeros(2, 2);
        assert!(matches!(inverse(&z), Err(Error::SingularMatrix { .. })));
        let rect = M::zeros(2, 3);
        assert!(matches!(inverse(&rect), Err(Error::NotSquare { .. })));
    }

    fn hilbert(n: usize) -> M {
        M::from_fn(n, n, |i, j| cr(1.0 / (i + j + 1) as f64))
    }

    #[test]
    fn hilbert_condition_gate() {
        // cond₁(H₈) ≈ 3.4e10, cond₁(H₁₃) ≫ 1e12.
        let h8 = hilbert(8);
        let r8 = rcond(&h8).unwrap();
        assert!(r8 > 1e-12 && r8 < 1e-9, "rcond(H8) = {r8:e}");
        assert!(inverse(&h8).is_ok());
        assert!(matches!(
            inverse_with_rcond(&h8, 1e-9),
            Err(Error::SingularMatrix { .. })
        ));
        match inverse(&hilbert(13)) {
            Err(Error::SingularMatrix { rcond }) => assert!(rcond < 1e-12),
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn inverse_square_roots() {
        let i3 = M::identity(3, 3);
        assert!((inv_sqrt_posdef(&i3).unwrap() - &i3).norm() < 1e-15);
        let four = from_real_rows::<f64>(&[&[4.0]]);
        assert!((inv_sqrt_posdef(&four).unwrap()[(0, 0)].re - 0.5).abs() < 1e-15);
        // 1 + B†B for B = −(0.2, 0.15).
        let b = from_real_rows::<f64>(&[&[-0.2, -0.15]]);
        let a = M::identity(2, 2) + b.adjoint() * &b;
        let s = inv_sqrt_posdef(&a).unwrap();
        assert!((&s * &a * &s - M::identity(2, 2)).norm() < 1e-14);
        assert!(hermitian_deviation(&s) < 1e-15);
        let root = sqrt_posdef(&a).unwrap();
        assert!((&root * &root - &a).norm() < 1e-14);
        assert!((&root * &s - M::identity(2, 2)).norm() < 1e-14);
        let indefinite = from_real_rows::<f64>(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert!(matches!(
            inv_sqrt_posdef(&indefinite),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn hermiticity_helpers() {
        let h = from_rows::<f64>(&[&[(1.0, 0.0), (0.0, 1.0)], &[(0.0, -1.0), (2.0, 0.0)]]);
        assert!(is_hermitian(&h, 1e-14));
        let n = from_rows::<f64>(&[&[(1.0, 0.0), (0.0, 1.0)], &[(0.0, 1.0), (2.0, 0.0)]]);
        assert!(!is_hermitian(&n, 1e-14));
        assert!(is_hermitian(&hermitian_part(&n), 1e-14));
        assert!(commutator(&h, &h).norm() < 1e-15);
    }
}

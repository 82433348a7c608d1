use nalgebra::ComplexField;
use num_complex::Complex;

use super::{ensure_shape, ensure_square, general_eig, hermitian_eig, inverse, is_hermitian};
use super::{rmax, EigenDecomposition};
use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};

/// Default relative spectral-gap floor for [`sylvester_solve`].
pub const DEFAULT_MIN_GAP: f64 = 1e-10;

struct Diagonalized<T: Real> {
    eig: EigenDecomposition<T>,
    inv_vectors: CMatrix<T>,
}

fn diagonalize<T: Real>(a: &CMatrix<T>) -> Result<Diagonalized<T>> {
    if is_hermitian(a, T::tol(1e-12)) {
        let eig = hermitian_eig(a)?;
        let inv_vectors = eig.vectors.adjoint();
        Ok(Diagonalized { eig, inv_vectors })
    } else {
        let eig = general_eig(a)?;
        let inv_vectors = inverse(&eig.vectors)?;
        Ok(Diagonalized { eig, inv_vectors })
    }
}

fn fmt_complex<T: Real>(z: Complex<T>) -> String {
    if z.im == T::zero() {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// Solves `X ω − Δ X = Ω` for `X`.
///
/// Both coefficient matrices are diagonalized, the right-hand side is moved to
/// the joint eigenbasis, divided entrywise by `ω_j − Δ_i`, and moved back.
/// The gap floor is `1e-10 · max(1, ‖ω‖, ‖Δ‖)`.
pub fn sylvester_solve<T: Real>(
    omega: &CMatrix<T>,
    delta: &CMatrix<T>,
    rhs: &CMatrix<T>,
) -> Result<CMatrix<T>> {
    let scale = rmax(T::one(), rmax(omega.norm(), delta.norm()));
    sylvester_solve_with(omega, delta, rhs, T::tol(DEFAULT_MIN_GAP) * scale)
}

/// [`sylvester_solve`] with an explicit absolute gap floor.
pub fn sylvester_solve_with<T: Real>(
    omega: &CMatrix<T>,
    delta: &CMatrix<T>,
    rhs: &CMatrix<T>,
    min_gap: T,
) -> Result<CMatrix<T>> {
    ensure_square(omega)?;
    ensure_square(delta)?;
    ensure_shape(rhs, delta.nrows(), omega.nrows())?;
    let w = diagonalize(omega)?;
    let d = diagonalize(delta)?;

    let mut y = &d.inv_vectors * rhs * &w.eig.vectors;
    for i in 0..y.nrows() {
        for j in 0..y.ncols() {
            let den = w.eig.values[j] - d.eig.values[i];
            let gap = den.modulus();
            if gap < min_gap {
                return Err(Error::SpectraOverlap {
                    omega_eigenvalue: fmt_complex(w.eig.values[j]),
                    delta_eigenvalue: fmt_complex(d.eig.values[i]),
                    gap: gap.as_f64(),
                });
            }
            y[(i, j)] /= den;
        }
    }
    Ok(&d.eig.vectors * y * &w.inv_vectors)
}

/// `‖X ω − Δ X − Ω‖` (Frobenius).
pub fn sylvester_residual<T: Real>(
    omega: &CMatrix<T>,
    delta: &CMatrix<T>,
    rhs: &CMatrix<T>,
    x: &CMatrix<T>,
) -> T {
    (x * omega - delta * x - rhs).norm()
}

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::ComplexField;
use num_complex::Complex;

use super::{
    ensure_finite, ensure_square, hermitian_deviation, hermitian_part, rmax,
    DEFAULT_HERMITIAN_TOL, DEFAULT_MAX_EIGVEC_CONDITION,
};
use crate::error::{Error, Result};
use crate::scalar::{cr, CMatrix, Real};

const MAX_SWEEPS: usize = 100_000;

/// Eigenpairs of a square matrix. Columns of `vectors` are right
/// eigenvectors normalized to unit length.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Real> {
    pub values: Vec<Complex<T>>,
    pub vectors: CMatrix<T>,
    pub is_hermitian_input: bool,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn real_values(&self) -> Vec<T> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// Largest `|Im λ|` over the spectrum.
    pub fn max_imaginary(&self) -> T {
        self.values
            .iter()
            .map(|z| super::rabs(z.im))
            .fold(T::zero(), rmax)
    }

    /// `max_i ‖A vᵢ − λᵢ vᵢ‖`.
    pub fn max_residual(&self, a: &CMatrix<T>) -> T {
        (0..self.values.len())
            .map(|i| {
                let v = self.vectors.column(i);
                (a * v - v * self.values[i]).norm()
            })
            .fold(T::zero(), rmax)
    }
}

/// Eigendecomposition of a hermitian matrix: real eigenvalues in ascending
/// order and an orthonormal eigenvector basis.
pub fn hermitian_eig<T: Real>(a: &CMatrix<T>) -> Result<EigenDecomposition<T>> {
    ensure_square(a)?;
    ensure_finite(a)?;
    let n = a.nrows();
    let dev = hermitian_deviation(a);
    let scale = a.norm();
    if dev > T::tol(DEFAULT_HERMITIAN_TOL) * scale {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    if n == 0 {
        return Ok(EigenDecomposition {
            values: vec![],
            vectors: a.clone(),
            is_hermitian_input: true,
        });
    }
    let eig = SymmetricEigen::try_new(hermitian_part(a), T::default_epsilon(), MAX_SWEEPS)
        .ok_or(Error::ConvergenceFailure {
            routine: "hermitian eigensolver",
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| cr(eig.eigenvalues[i])).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition {
        values,
        vectors,
        is_hermitian_input: true,
    })
}

/// Eigendecomposition of a general (diagonalizable) square matrix.
///
/// Computed from the complex Schur form `A = Q T Q†` by back-substitution on
/// the triangular factor. Eigenvalues are sorted by real part, then imaginary
/// part. Fails with `DefectiveMatrix` when the eigenvector matrix has a
/// condition number above [`DEFAULT_MAX_EIGVEC_CONDITION`].
pub fn general_eig<T: Real>(a: &CMatrix<T>) -> Result<EigenDecomposition<T>> {
    ensure_square(a)?;
    ensure_finite(a)?;
    let n = a.nrows();
    let is_herm = hermitian_deviation(a) <= T::tol(1e-14) * a.norm();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: vec![],
            vectors: a.clone(),
            is_hermitian_input: is_herm,
        });
    }
    let schur = Schur::try_new(a.clone(), T::default_epsilon(), MAX_SWEEPS).ok_or(
        Error::ConvergenceFailure {
            routine: "Schur decomposition",
        },
    )?;
    let (q, t) = schur.unpack();
    let tnorm = t.norm();
    let smin = rmax(
        T::default_epsilon() * tnorm,
        T::min_value().unwrap_or(T::default_epsilon()),
    );

    let mut y = CMatrix::<T>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = cr(T::one());
        for i in (0..k).rev() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut den = t[(i, i)] - lambda;
            if den.modulus() < smin {
                den = cr(smin);
            }
            y[(i, k)] = -acc / den;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        col.iter_mut().for_each(|z| *z = z.unscale(nrm));
    }

    let condition = match vectors.clone().try_svd(false, false, T::default_epsilon(), MAX_SWEEPS) {
        Some(svd) => {
            let sv = &svd.singular_values;
            let smax = sv.iter().copied().fold(T::zero(), rmax);
            let smin = sv.iter().copied().fold(T::infinity(), |a, b| if b < a { b } else { a });
            if smin == T::zero() {
                T::infinity()
            } else {
                smax / smin
            }
        }
        None => T::infinity(),
    };
    if !(condition <= T::lit(DEFAULT_MAX_EIGVEC_CONDITION)) {
        return Err(Error::DefectiveMatrix {
            condition: condition.as_f64(),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (t[(i, i)], t[(j, j)]);
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    let values = order.iter().map(|&i| t[(i, i)]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(EigenDecomposition {
        values,
        vectors,
        is_hermitian_input: is_herm,
    })
}

/// Eigenvalues only, from the diagonal of the complex Schur form; no
/// diagonalizability requirement.
pub fn general_eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    ensure_square(a)?;
    ensure_finite(a)?;
    if a.nrows() == 0 {
        return Ok(vec![]);
    }
    let schur = Schur::try_new(a.clone(), T::default_epsilon(), MAX_SWEEPS).ok_or(
        Error::ConvergenceFailure {
            routine: "Schur decomposition",
        },
    )?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

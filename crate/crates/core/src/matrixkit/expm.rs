use nalgebra::ComplexField;
use num_complex::Complex;

use super::{ensure_finite, ensure_square, hermitian_eig, one_norm, spectral_reassemble};
use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Real};

// Degree-13 Padé coefficients and the matching scaling threshold.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé kernel.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    ensure_square(a)?;
    ensure_finite(a)?;
    let n = a.nrows();
    let id = CMatrix::<T>::identity(n, n);
    let anorm = one_norm(a);
    if anorm == T::zero() {
        return Ok(id);
    }
    let ratio = (anorm / T::lit(THETA13)).as_f64();
    let s = if ratio > 1.0 {
        ratio.log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(T::lit(2f64.powi(-s)));
    let b = |k: usize| T::lit(PADE13[k]);

    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (a6.scale(b(13)) + a4.scale(b(11)) + a2.scale(b(9)))
        + a6.scale(b(7))
        + a4.scale(b(5))
        + a2.scale(b(3))
        + id.scale(b(1));
    let u = &scaled * u_inner;
    let v = &a6 * (a6.scale(b(12)) + a4.scale(b(10)) + a2.scale(b(8)))
        + a6.scale(b(6))
        + a4.scale(b(4))
        + a2.scale(b(2))
        + id.scale(b(0));

    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or(Error::ConvergenceFailure { routine: "expm" })?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !crate::scalar::all_finite(&r) {
        return Err(Error::ConvergenceFailure { routine: "expm" });
    }
    Ok(r)
}

/// `exp(−i h t)` for hermitian `h`, through its eigendecomposition. The result
/// is unitary to rounding.
pub fn unitary_propagator<T: Real>(h: &CMatrix<T>, t: T) -> Result<CMatrix<T>> {
    let e = hermitian_eig(h)?;
    Ok(spectral_reassemble(&e, |z| {
        ComplexField::exp(Complex::new(T::zero(), -z.re * t))
    }))
}

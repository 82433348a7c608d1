//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All matrices are dense complex matrices over a real field `T`. The field is
//! generic so the same code serves `f64` (the default everywhere) and `f32`
//! (useful for cheap sweeps). Tolerances are written as `f64` literals and
//! clamped from below by a multiple of the field's machine epsilon, so the
//! `f64` defaults stay meaningful when instantiated at lower precision.

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real field usable as the scalar of a [`CMatrix`].
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display {
    /// Converts an `f64` literal into the field.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in the scalar field")
    }

    /// Converts to `f64` for reporting and error payloads.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance `x`, but never below `64 ε` of the field.
    fn tol(x: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(64.0);
        let t = Self::lit(x);
        if t < floor {
            floor
        } else {
            t
        }
    }

    fn is_finite_value(self) -> bool {
        self.as_f64().is_finite()
    }

    fn infinity() -> Self {
        Self::lit(f64::INFINITY)
    }
}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display {}

/// Dense complex matrix over the real field `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex column vector over the real field `T`.
pub type CVector<T> = DVector<Complex<T>>;

#[inline]
pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Complex number from `f64` parts.
#[inline]
pub fn clit<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// Builds a matrix from row-major complex entries given as `(re, im)` pairs.
pub fn from_rows<T: Real>(rows: &[&[(f64, f64)]]) -> CMatrix<T> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(nrows, ncols, |i, j| clit(rows[i][j].0, rows[i][j].1))
}

/// Builds a matrix from row-major real entries.
pub fn from_real_rows<T: Real>(rows: &[&[f64]]) -> CMatrix<T> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(nrows, ncols, |i, j| clit(rows[i][j], 0.0))
}

pub fn all_finite<T: Real>(m: &CMatrix<T>) -> bool {
    m.iter().all(|z| z.re.is_finite_value() && z.im.is_finite_value())
}

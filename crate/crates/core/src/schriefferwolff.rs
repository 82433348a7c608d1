//! Schrieffer–Wolff rotations.
//!
//! The generator is `S = [[0, −𝒮†], [𝒮, 0]]` in slow-first ordering, and the
//! rotation `R = e^{S}` block-diagonalizes `H` as `R†HR` when it comes from a
//! solution of Bloch's equation. Writing `B = UΣV†`, the exact generator is
//! `𝒮 = U arctan(Σ) V†` and the rotation has the closed form
//!
//! ```text
//! R = [ 1  −B† ] · diag((1 + B†B)^{−1/2}, (1 + BB†)^{−1/2})
//!     [ B   1  ]
//! ```
//!
//! whose slow columns span `(α, Bα)`.

use nalgebra::ComplexField;

use crate::bloch::{BlochEmbedding, BlochMethod};
use crate::error::{Error, Result};
use crate::matrixkit::{
    ensure_shape, ensure_square, hermitian_eig, hermitian_part, inv_sqrt_posdef, spectral_norm,
    sylvester_solve,
};
use crate::partition::PartitionedHamiltonian;
use crate::scalar::{cr, CMatrix, Real};

/// Threshold on `|1 − (ω_j/Δ_i)²|` below which [`pole_warning`] fires.
pub const POLE_WARNING_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorOrder {
    ExactFromB,
    FirstOrder,
}

#[derive(Debug, Clone)]
pub struct SWGenerator<T: Real> {
    /// The q×p block `𝒮`.
    pub script_s: CMatrix<T>,
    pub order: GeneratorOrder,
    /// `e^{S}`, (p+q)×(p+q), slow-first.
    pub rotation: CMatrix<T>,
}

impl<T: Real> SWGenerator<T> {
    pub fn slow_dim(&self) -> usize {
        self.script_s.ncols()
    }

    /// The full antihermitian generator `S`.
    pub fn generator(&self) -> CMatrix<T> {
        let p = self.script_s.ncols();
        let q = self.script_s.nrows();
        let mut s = CMatrix::<T>::zeros(p + q, p + q);
        s.view_mut((p, 0), (q, p)).copy_from(&self.script_s);
        s.view_mut((0, p), (p, q)).copy_from(&(-self.script_s.adjoint()));
        s
    }
}

/// Applies `f` to the singular values of `m`: `U f(Σ) V†`.
fn singular_map<T: Real>(m: &CMatrix<T>, f: impl Fn(T) -> Result<T>) -> Result<CMatrix<T>> {
    if m.is_empty() {
        return Ok(m.clone());
    }
    let svd = m.clone().try_svd(true, true, T::default_epsilon(), 0).ok_or(Error::ConvergenceFailure {
        routine: "svd",
    })?;
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut mapped = Vec::with_capacity(svd.singular_values.len());
    for &s in svd.singular_values.iter() {
        mapped.push(cr(f(s)?));
    }
    let d = CMatrix::<T>::from_diagonal(&nalgebra::DVector::from_vec(mapped));
    Ok(u * d * v_t)
}

/// Closed-form rotation from an embedding `B` (q×p).
pub fn rotation_from_embedding<T: Real>(b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let q = b.nrows();
    let p = b.ncols();
    let b_adj = b.adjoint();
    let np = inv_sqrt_posdef(&(CMatrix::<T>::identity(p, p) + &b_adj * b))?;
    let nq = inv_sqrt_posdef(&(CMatrix::<T>::identity(q, q) + b * &b_adj))?;
    let mut r = CMatrix::<T>::zeros(p + q, p + q);
    r.view_mut((0, 0), (p, p)).copy_from(&np);
    r.view_mut((p, 0), (q, p)).copy_from(&(b * &np));
    r.view_mut((0, p), (p, q)).copy_from(&(-(&b_adj * &nq)));
    r.view_mut((p, p), (q, q)).copy_from(&nq);
    Ok(r)
}

/// `B = U tan(Σ) V†` for `𝒮 = UΣV†`; the inverse of the principal-angle map.
pub fn embedding_from_script_s<T: Real>(script_s: &CMatrix<T>) -> Result<CMatrix<T>> {
    let floor = T::tol(1e-14);
    singular_map(script_s, |s| {
        let c = ComplexField::cos(s);
        if c <= floor {
            Err(Error::NonFinite)
        } else {
            Ok(ComplexField::sin(s) / c)
        }
    })
}

/// Exact generator of the rotation attached to `be`.
pub fn generator_from_embedding<T: Real>(be: &BlochEmbedding<T>) -> Result<SWGenerator<T>> {
    generator_from_b(be.b())
}

pub fn generator_from_b<T: Real>(b: &CMatrix<T>) -> Result<SWGenerator<T>> {
    let script_s = singular_map(b, |s| Ok(ComplexField::atan(s)))?;
    Ok(SWGenerator {
        script_s,
        order: GeneratorOrder::ExactFromB,
        rotation: rotation_from_embedding(b)?,
    })
}

/// `R†HR` for `H` in slow-first ordering.
pub fn rotated_hamiltonian<T: Real>(h: &CMatrix<T>, gen: &SWGenerator<T>) -> Result<CMatrix<T>> {
    ensure_square(h)?;
    let n = gen.rotation.nrows();
    ensure_shape(h, n, n)?;
    Ok(gen.rotation.adjoint() * h * &gen.rotation)
}

/// Spectral norm of the fast-slow block of `R†HR`.
pub fn block_offdiagonal_norm<T: Real>(h: &CMatrix<T>, gen: &SWGenerator<T>, slow_dim: usize) -> Result<T> {
    let rotated = rotated_hamiltonian(h, gen)?;
    if slow_dim == 0 || slow_dim >= rotated.nrows() {
        return Err(Error::InvalidIndices(format!(
            "slow dimension {slow_dim} outside 1..{}",
            rotated.nrows()
        )));
    }
    let q = rotated.nrows() - slow_dim;
    Ok(spectral_norm(&rotated.view((slow_dim, 0), (q, slow_dim)).into_owned()))
}

/// The slow block of `R†HR`.
pub fn rotated_slow_block<T: Real>(h: &CMatrix<T>, gen: &SWGenerator<T>) -> Result<CMatrix<T>> {
    let p = gen.slow_dim();
    let rotated = rotated_hamiltonian(h, gen)?;
    Ok(hermitian_part(&rotated.view((0, 0), (p, p)).into_owned()))
}

/// Solves `𝒮₀ω − Δ𝒮₀ = Ω` against an explicit fast block.
pub fn first_order_generator_with<T: Real>(
    omega: &CMatrix<T>,
    delta: &CMatrix<T>,
    coupling: &CMatrix<T>,
) -> Result<SWGenerator<T>> {
    let script_s = sylvester_solve(omega, delta, coupling)?;
    let b = embedding_from_script_s(&script_s)?;
    Ok(SWGenerator {
        script_s,
        order: GeneratorOrder::FirstOrder,
        rotation: rotation_from_embedding(&b)?,
    })
}

pub fn first_order_generator<T: Real>(ph: &PartitionedHamiltonian<T>) -> Result<SWGenerator<T>> {
    first_order_generator_with(ph.omega(), ph.delta(), ph.coupling())
}

/// `ω + ½(𝒮₀†Ω + Ω†𝒮₀)`.
pub fn sw_hamiltonian_from<T: Real>(omega: &CMatrix<T>, coupling: &CMatrix<T>, script_s: &CMatrix<T>) -> CMatrix<T> {
    let cross = script_s.adjoint() * coupling;
    let h = omega + (&cross + cross.adjoint()) * cr(T::lit(0.5));
    hermitian_part(&h)
}

pub fn sw_first_order_hamiltonian<T: Real>(ph: &PartitionedHamiltonian<T>) -> Result<CMatrix<T>> {
    let gen = first_order_generator(ph)?;
    Ok(sw_hamiltonian_from(ph.omega(), ph.coupling(), &gen.script_s))
}

/// An embedding seeded from the first-order generator through `B₀ = tan(𝒮₀)`,
/// usable as a starting point for the Bloch iteration.
pub fn sw_seed_embedding<T: Real>(ph: &PartitionedHamiltonian<T>) -> Result<BlochEmbedding<T>> {
    let gen = first_order_generator(ph)?;
    let b = embedding_from_script_s(&gen.script_s)?;
    BlochEmbedding::new(ph, b, BlochMethod::SwSeed, 0, crate::matrixkit::NormKind::Spectral)
}

/// `min |1 − (ω_j/Δ_i)²|` over eigenvalues of the two diagonal blocks
/// (zero fast eigenvalues are skipped). For the Λ system this is
/// `|1 − (δ/2Δ)²|`, the denominator of the resummed coefficients.
pub fn pole_proximity<T: Real>(ph: &PartitionedHamiltonian<T>) -> Result<T> {
    let w = hermitian_eig(ph.omega())?.real_values();
    let d = hermitian_eig(ph.delta())?.real_values();
    let mut best = T::infinity();
    for &x in &w {
        for &y in &d {
            if y == T::zero() {
                continue;
            }
            let r = x / y;
            let v = crate::matrixkit::rabs(T::one() - r * r);
            if v < best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// A warning message when the first-order coefficients sit near their pole.
pub fn pole_warning<T: Real>(ph: &PartitionedHamiltonian<T>) -> Option<String> {
    let p = pole_proximity(ph).ok()?;
    (p < T::lit(POLE_WARNING_THRESHOLD)).then(|| {
        format!(
            "warning: first-order Schrieffer-Wolff coefficients near their pole (|1 - (w/D)^2| = {:.3e})",
            p.as_f64()
        )
    })
}

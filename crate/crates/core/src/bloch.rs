//! Bloch's equation `Ω + ΔB = Bω + BΩ†B` for the embedding `γ = Bα` of an
//! invariant slow-attached subspace, solved by fixed-point iteration of
//!
//! ```text
//! T(A) = −Δ⁻¹Ω + Δ⁻¹Aω + Δ⁻¹AΩ†A
//! ```
//!
//! or by the perturbative series `B = Σ_k B₍ₖ₎` in powers of `Δ⁻¹`.

use crate::error::{Error, Result};
use crate::matrixkit::{ensure_shape, norm, NormKind};
use crate::partition::PartitionedHamiltonian;
use crate::scalar::{all_finite, CMatrix, Real};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 64;
/// Residual growth factor (relative to the starting residual) treated as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlochMethod {
    Adiabatic,
    Iterative,
    Perturbative,
    /// `tan(𝒮₀)` from the first-order Schrieffer–Wolff generator.
    SwSeed,
}

/// A candidate solution `B` (q×p) of Bloch's equation.
#[derive(Debug, Clone)]
pub struct BlochEmbedding<T: Real> {
    b: CMatrix<T>,
    pub method: BlochMethod,
    /// Series order or number of iterations performed.
    pub steps: usize,
    pub residual: T,
    pub norm: NormKind,
    /// Individual series terms `B₍₁₎ … B₍ₖ₎` (perturbative method only).
    pub terms: Vec<CMatrix<T>>,
    /// Residual after each iteration, starting with `B⁽⁰⁾` (iterative method only).
    pub residual_history: Vec<T>,
}

impl<T: Real> BlochEmbedding<T> {
    /// Wraps an arbitrary `B`, computing its residual.
    pub fn new(
        ph: &PartitionedHamiltonian<T>,
        b: CMatrix<T>,
        method: BlochMethod,
        steps: usize,
        kind: NormKind,
    ) -> Result<Self> {
        let residual = bloch_residual_with(ph, &b, kind)?;
        Ok(BlochEmbedding {
            b,
            method,
            steps,
            residual,
            norm: kind,
            terms: vec![],
            residual_history: vec![],
        })
    }

    pub fn b(&self) -> &CMatrix<T> {
        &self.b
    }

    pub fn into_b(self) -> CMatrix<T> {
        self.b
    }
}

fn check_embedding_shape<T: Real>(ph: &PartitionedHamiltonian<T>, a: &CMatrix<T>) -> Result<()> {
    ensure_shape(a, ph.fast_dim(), ph.slow_dim())
}

/// One application of the Bloch map `T`.
pub fn t_map<T: Real>(ph: &PartitionedHamiltonian<T>, a: &CMatrix<T>) -> Result<CMatrix<T>> {
    check_embedding_shape(ph, a)?;
    let inner = ph.coupling().scale(-T::one()) + a * ph.omega() + a * ph.coupling().adjoint() * a;
    Ok(ph.delta_inv() * inner)
}

/// `Ω + ΔB − Bω − BΩ†B`.
pub fn bloch_defect<T: Real>(ph: &PartitionedHamiltonian<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    check_embedding_shape(ph, b)?;
    Ok(ph.coupling() + ph.delta() * b - b * ph.omega() - b * ph.coupling().adjoint() * b)
}

/// Spectral-norm residual of Bloch's equation.
pub fn bloch_residual<T: Real>(ph: &PartitionedHamiltonian<T>, b: &CMatrix<T>) -> Result<T> {
    bloch_residual_with(ph, b, NormKind::Spectral)
}

pub fn bloch_residual_with<T: Real>(
    ph: &PartitionedHamiltonian<T>,
    b: &CMatrix<T>,
    kind: NormKind,
) -> Result<T> {
    Ok(norm(&bloch_defect(ph, b)?, kind))
}

/// `B⁽⁰⁾ = −Δ⁻¹Ω`, the adiabatic-elimination embedding.
pub fn adiabatic_embedding<T: Real>(ph: &PartitionedHamiltonian<T>) -> BlochEmbedding<T> {
    let b = -(ph.delta_inv() * ph.coupling());
    let residual = bloch_residual(ph, &b).expect("shapes consistent by construction");
    BlochEmbedding {
        b,
        method: BlochMethod::Adiabatic,
        steps: 0,
        residual,
        norm: NormKind::Spectral,
        terms: vec![],
        residual_history: vec![residual],
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IterationOptions<T: Real> {
    pub max_iter: usize,
    pub tol: T,
    pub norm: NormKind,
}

impl<T: Real> Default for IterationOptions<T> {
    fn default() -> Self {
        IterationOptions {
            max_iter: DEFAULT_MAX_ITER,
            tol: T::tol(DEFAULT_TOL),
            norm: NormKind::Spectral,
        }
    }
}

/// Iterates `B⁽ᵏ⁺¹⁾ = T[B⁽ᵏ⁾]` from `B⁽⁰⁾ = −Δ⁻¹Ω` until the residual drops to
/// `tol` or `max_iter` steps have been taken. Reaching `max_iter` is not an
/// error; the last iterate is returned with its residual.
pub fn iterate_bloch<T: Real>(
    ph: &PartitionedHamiltonian<T>,
    opts: IterationOptions<T>,
) -> Result<BlochEmbedding<T>> {
    iterate_bloch_from(ph, -(ph.delta_inv() * ph.coupling()), opts)
}

/// [`iterate_bloch`] from a caller-supplied starting point.
pub fn iterate_bloch_from<T: Real>(
    ph: &PartitionedHamiltonian<T>,
    start: CMatrix<T>,
    opts: IterationOptions<T>,
) -> Result<BlochEmbedding<T>> {
    let mut b = start;
    let initial = bloch_residual_with(ph, &b, opts.norm)?;
    let mut residual = initial;
    let mut history = vec![residual];
    let limit = T::lit(DIVERGENCE_FACTOR) * initial;
    let mut steps = 0;
    while residual > opts.tol && steps < opts.max_iter {
        b = t_map(ph, &b)?;
        steps += 1;
        residual = bloch_residual_with(ph, &b, opts.norm)?;
        history.push(residual);
        if !all_finite(&b) || !residual.is_finite_value() || residual > limit {
            return Err(Error::Diverged {
                iteration: steps,
                residual: residual.as_f64(),
            });
        }
    }
    Ok(BlochEmbedding {
        b,
        method: BlochMethod::Iterative,
        steps,
        residual,
        norm: opts.norm,
        terms: vec![],
        residual_history: history,
    })
}

/// Exactly `k` applications of `T` to `B⁽⁰⁾`, i.e. `B⁽ᵏ⁾`.
pub fn bloch_iterate<T: Real>(ph: &PartitionedHamiltonian<T>, k: usize) -> Result<BlochEmbedding<T>> {
    iterate_bloch(
        ph,
        IterationOptions {
            max_iter: k,
            tol: T::zero(),
            norm: NormKind::Spectral,
        },
    )
}

/// Partial sum `Σ_{l=1}^{order} B₍ₗ₎` of the perturbative series with
///
/// ```text
/// B₍₁₎   = −Δ⁻¹Ω
/// B₍ₖ₊₁₎ = Δ⁻¹B₍ₖ₎ω + Δ⁻¹ Σ_{l=1}^{k−1} B₍ₖ₋ₗ₎Ω†B₍ₗ₎
/// ```
pub fn perturbative_bloch<T: Real>(
    ph: &PartitionedHamiltonian<T>,
    order: usize,
) -> Result<BlochEmbedding<T>> {
    let order = order.max(1);
    let dinv = ph.delta_inv();
    let coupling_adj = ph.coupling().adjoint();
    let mut terms: Vec<CMatrix<T>> = Vec::with_capacity(order);
    terms.push(-(dinv * ph.coupling()));
    for k in 1..order {
        // terms[k] is B₍ₖ₊₁₎; terms[i] is B₍ᵢ₊₁₎.
        let mut acc = &terms[k - 1] * ph.omega();
        for l in 1..k {
            acc += &terms[k - l - 1] * &coupling_adj * &terms[l - 1];
        }
        terms.push(dinv * acc);
    }
    let b = terms
        .iter()
        .fold(CMatrix::zeros(ph.fast_dim(), ph.slow_dim()), |s, t| s + t);
    let residual = bloch_residual(ph, &b)?;
    Ok(BlochEmbedding {
        b,
        method: BlochMethod::Perturbative,
        steps: order,
        residual,
        norm: NormKind::Spectral,
        terms,
        residual_history: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{coupling_scales, partition_hamiltonian};
    use crate::presets::lambda_system;
    use crate::scalar::{cr, from_real_rows};

    fn lambda() -> PartitionedHamiltonian<f64> {
        let h = lambda_system::<f64>(-0.0175, 1.0, (0.4, 0.0), (0.3, 0.0));
        partition_hamiltonian(&h, &[0, 1]).unwrap()
    }

    #[test]
    fn t_map_at_zero_and_without_coupling() {
        let ph = lambda();
        let t0 = t_map(&ph, &CMatrix::zeros(1, 2)).unwrap();
        assert_eq!(t0, -(ph.delta_inv() * ph.coupling()));

        let free = ph.with_coupling(CMatrix::zeros(1, 2)).unwrap();
        let a = from_real_rows::<f64>(&[&[0.3, -0.7]]);
        let ta = t_map(&free, &a).unwrap();
        assert!((ta - free.delta_inv() * &a * free.omega()).norm() < 1e-16);

        assert!(matches!(
            t_map(&ph, &CMatrix::zeros(2, 1)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn t_map_lambda_by_hand() {
        // A = −(0.2, 0.15), ω = diag(0.00875, −0.00875), Ω = (0.2, 0.15), Δ = 1:
        // T(A) = −Ω + Aω + A·(Ω†A), Ω†A... with the scalar ΩA† = −0.0625.
        let ph = lambda();
        let a = from_real_rows::<f64>(&[&[-0.2, -0.15]]);
        let ta = t_map(&ph, &a).unwrap();
        let q = -(0.2 * 0.2 + 0.15 * 0.15); // A Ω† (1×1)
        let expect = [
            -0.2 + (-0.2 * 0.00875) + q * -0.2,
            -0.15 + (-0.15 * -0.00875) + q * -0.15,
        ];
        assert!((ta[(0, 0)].re - expect[0]).abs() < 1e-16);
        assert!((ta[(0, 1)].re - expect[1]).abs() < 1e-16);
        let r = coupling_scales(&ph, NormKind::Spectral).radius.unwrap();
        assert!(crate::matrixkit::spectral_norm(&ta) <= r);
    }

    #[test]
    fn adiabatic_examples() {
        let be = adiabatic_embedding(&lambda());
        assert_eq!(be.b()[(0, 0)].re, -0.2);
        assert_eq!(be.b()[(0, 1)].re, -0.15);
        assert_eq!(be.method, BlochMethod::Adiabatic);

        let delta = from_real_rows::<f64>(&[&[10.0, 0.0], &[0.0, 20.0]]);
        let ph = PartitionedHamiltonian::from_blocks(
            CMatrix::zeros(2, 2),
            delta,
            CMatrix::identity(2, 2),
        )
        .unwrap();
        let be = adiabatic_embedding(&ph);
        let expect = from_real_rows::<f64>(&[&[-0.1, 0.0], &[0.0, -0.05]]);
        assert!((be.b() - expect).norm() < 1e-17);
    }

    #[test]
    fn uncoupled_converges_immediately() {
        let ph = lambda().with_coupling(CMatrix::zeros(1, 2)).unwrap();
        let be = adiabatic_embedding(&ph);
        assert_eq!(be.residual, 0.0);
        assert_eq!(be.b().norm(), 0.0);
        let it = iterate_bloch(&ph, IterationOptions::default()).unwrap();
        assert_eq!(it.steps, 0);
        assert_eq!(it.residual, 0.0);
    }

    #[test]
    fn residual_examples() {
        let ph = lambda();
        let zero = CMatrix::zeros(1, 2);
        let r0 = bloch_residual(&ph, &zero).unwrap();
        assert!((r0 - crate::matrixkit::spectral_norm(ph.coupling())).abs() < 1e-16);
        // At B = −Δ⁻¹Ω the defect is Δ⁻¹Ωω − Δ⁻¹ΩΩ†Δ⁻¹Ω.
        let b = -(ph.delta_inv() * ph.coupling());
        let w = ph.delta_inv() * ph.coupling();
        let expect = &w * ph.omega() - &w * ph.coupling().adjoint() * &w;
        let r = bloch_residual(&ph, &b).unwrap();
        assert!((r - crate::matrixkit::spectral_norm(&expect)).abs() < 1e-16);
    }

    #[test]
    fn perturbative_low_orders() {
        let ph = lambda();
        let one = perturbative_bloch(&ph, 1).unwrap();
        assert_eq!(one.b(), adiabatic_embedding(&ph).b());
        let two = perturbative_bloch(&ph, 2).unwrap();
        let dinv = ph.delta_inv();
        let expect = -(dinv * ph.coupling()) - dinv * dinv * ph.coupling() * ph.omega();
        assert!((two.b() - expect).norm() < 1e-17);
        assert_eq!(two.terms.len(), 2);
    }

    #[test]
    fn iteration_converges_on_lambda() {
        let ph = lambda();
        let it = iterate_bloch(&ph, IterationOptions::default()).unwrap();
        assert!(it.residual <= 1e-12);
        let fixed = t_map(&ph, it.b()).unwrap();
        assert!((fixed - it.b()).norm() < 1e-11);
        let b4 = bloch_iterate(&ph, 4).unwrap();
        assert_eq!(b4.steps, 4);
        assert_eq!(b4.residual_history.len(), 5);
    }

    #[test]
    fn divergence_is_reported() {
        // Strong coupling against a tiny fast block: no small solution.
        let ph = PartitionedHamiltonian::from_blocks(
            from_real_rows::<f64>(&[&[0.0]]),
            from_real_rows::<f64>(&[&[0.01]]),
            CMatrix::from_element(1, 1, cr(1.0)),
        )
        .unwrap();
        assert!(matches!(
            iterate_bloch(&ph, IterationOptions::default()),
            Err(Error::Diverged { .. })
        ));
    }
}

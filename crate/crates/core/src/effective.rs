//! Effective slow-sector Hamiltonians built from an embedding `B`.
//!
//! * `h⁽¹⁾ = ω − Ω†Δ⁻¹Ω`, the adiabatic-elimination Hamiltonian;
//! * `h_eff = ω + Ω†B`, the non-hermitian generator of `i∂ₜα = h_eff α`;
//! * `h = S_B⁻¹(ω + Ω†B + B†Ω + B†ΔB)S_B⁻¹` with `S_B = √(1 + B†B)`, which is
//!   hermitian for every `B` and similar to `h_eff` when `B` solves Bloch's
//!   equation (`h = S_B h_eff S_B⁻¹`).

use crate::bloch::BlochEmbedding;
use crate::error::{Error, Result};
use crate::matrixkit::{ensure_shape, hermitian_part, inverse, rabs, sqrt_posdef};
use crate::partition::PartitionedHamiltonian;
use crate::scalar::{cr, CMatrix, CVector, Real};

#[derive(Debug, Clone)]
pub struct EffectiveOperator<T: Real> {
    /// `ω + Ω†B`.
    pub h_nonhermitian: CMatrix<T>,
    /// The symmetrized sandwich, exactly hermitian.
    pub h_hermitian: CMatrix<T>,
    /// Principal `√(1 + B†B)`.
    pub s_b: CMatrix<T>,
    /// Residual of the embedding this operator was built from.
    pub source_residual: T,
}

impl<T: Real> EffectiveOperator<T> {
    pub fn s_b_inverse(&self) -> Result<CMatrix<T>> {
        inverse(&self.s_b)
    }
}

/// `ω − Ω†Δ⁻¹Ω`.
pub fn adiabatic_hamiltonian<T: Real>(ph: &PartitionedHamiltonian<T>) -> CMatrix<T> {
    let coupling = ph.coupling();
    let h = ph.omega() - coupling.adjoint() * ph.delta_inv() * coupling;
    hermitian_part(&h)
}

fn check_b<T: Real>(ph: &PartitionedHamiltonian<T>, b: &CMatrix<T>) -> Result<()> {
    ensure_shape(b, ph.fast_dim(), ph.slow_dim())
}

/// `ω + Ω†B` for an arbitrary `B`.
pub fn nonhermitian_from_b<T: Real>(ph: &PartitionedHamiltonian<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    check_b(ph, b)?;
    Ok(ph.omega() + ph.coupling().adjoint() * b)
}

pub fn nonhermitian_effective<T: Real>(
    ph: &PartitionedHamiltonian<T>,
    be: &BlochEmbedding<T>,
) -> Result<CMatrix<T>> {
    nonhermitian_from_b(ph, be.b())
}

/// Hermitized effective Hamiltonian for an arbitrary `B`.
pub fn hermitian_from_b<T: Real>(
    ph: &PartitionedHamiltonian<T>,
    b: &CMatrix<T>,
) -> Result<(CMatrix<T>, CMatrix<T>)> {
    check_b(ph, b)?;
    let p = ph.slow_dim();
    let b_adj = b.adjoint();
    let metric = CMatrix::<T>::identity(p, p) + &b_adj * b;
    let s_b = sqrt_posdef(&metric)?;
    let s_inv = crate::matrixkit::inv_sqrt_posdef(&metric)?;
    let cross = ph.coupling().adjoint() * b;
    let inner = ph.omega() + &cross + cross.adjoint() + &b_adj * ph.delta() * b;
    let inner = hermitian_part(&inner);
    let h = hermitian_part(&(&s_inv * inner * &s_inv));
    Ok((h, s_b))
}

pub fn hermitian_effective<T: Real>(
    ph: &PartitionedHamiltonian<T>,
    be: &BlochEmbedding<T>,
) -> Result<EffectiveOperator<T>> {
    let h_nonhermitian = nonhermitian_effective(ph, be)?;
    let (h_hermitian, s_b) = hermitian_from_b(ph, be.b())?;
    Ok(EffectiveOperator {
        h_nonhermitian,
        h_hermitian,
        s_b,
        source_residual: be.residual,
    })
}

/// `h⁽²⁾ = ω − Ω†Δ⁻¹Ω − ½(Ω†Δ⁻²Ωω + ωΩ†Δ⁻²Ω)`.
pub fn second_order_hamiltonian<T: Real>(ph: &PartitionedHamiltonian<T>) -> CMatrix<T> {
    let coupling = ph.coupling();
    let dinv = ph.delta_inv();
    let w2 = coupling.adjoint() * dinv * dinv * coupling;
    let half = cr(T::lit(0.5));
    let h = ph.omega()
        - coupling.adjoint() * dinv * coupling
        - (&w2 * ph.omega() + ph.omega() * &w2) * half;
    hermitian_part(&h)
}

/// The slow-first vector `(α, Bα)`, normalized.
pub fn reconstruct_full_eigenvector<T: Real>(b: &CMatrix<T>, alpha: &CVector<T>) -> Result<CVector<T>> {
    if alpha.len() != b.ncols() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}-vector", b.ncols()),
            found: format!("{}-vector", alpha.len()),
        });
    }
    let gamma = b * alpha;
    let p = alpha.len();
    let mut psi = CVector::<T>::zeros(p + gamma.len());
    psi.rows_mut(0, p).copy_from(alpha);
    psi.rows_mut(p, gamma.len()).copy_from(&gamma);
    let n = psi.norm();
    if n == T::zero() || !n.is_finite_value() {
        return Err(Error::ZeroVector);
    }
    Ok(psi.unscale(n))
}

/// `‖h₁ − h₁†‖` for `h₁ = (1 + B†B)(ω + Ω†B)`, which vanishes when `B` solves
/// Bloch's equation.
#[allow(dead_code)]
pub(crate) fn h1_hermiticity_defect<T: Real>(ph: &PartitionedHamiltonian<T>, b: &CMatrix<T>) -> Result<T> {
    let h_eff = nonhermitian_from_b(ph, b)?;
    let p = ph.slow_dim();
    let h1 = (CMatrix::<T>::identity(p, p) + b.adjoint() * b) * h_eff;
    Ok(crate::matrixkit::hermitian_deviation(&h1))
}

/// Greedy nearest-value matching of a candidate spectrum into a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMatch {
    /// `(candidate index, reference index, |difference|)`, in candidate order.
    pub pairs: Vec<(usize, usize, f64)>,
    pub max_error: f64,
    /// Candidates whose nearest reference value had already been claimed.
    pub collisions: usize,
}

/// Pairs every candidate eigenvalue with a distinct reference eigenvalue.
///
/// All `(candidate, reference)` distances are sorted ascending and accepted
/// greedily when both sides are unclaimed. A collision is counted whenever a
/// candidate ends up paired with something other than its nearest reference.
pub fn match_spectra(candidate: &[f64], reference: &[f64]) -> Result<SpectrumMatch> {
    if candidate.len() > reference.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("at most {} values", reference.len()),
            found: format!("{} values", candidate.len()),
        });
    }
    let mut all = Vec::with_capacity(candidate.len() * reference.len());
    for (i, x) in candidate.iter().enumerate() {
        for (j, y) in reference.iter().enumerate() {
            all.push(((x - y).abs(), i, j));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut cand_used = vec![None; candidate.len()];
    let mut ref_used = vec![false; reference.len()];
    for (d, i, j) in all {
        if cand_used[i].is_none() && !ref_used[j] {
            cand_used[i] = Some((j, d));
            ref_used[j] = true;
        }
    }
    let mut pairs = Vec::with_capacity(candidate.len());
    let mut collisions = 0;
    let mut max_error: f64 = 0.0;
    for (i, slot) in cand_used.iter().enumerate() {
        let (j, d) = slot.expect("every candidate is paired when reference is at least as long");
        let nearest = reference
            .iter()
            .map(|y| (candidate[i] - y).abs())
            .fold(f64::INFINITY, f64::min);
        if d > nearest {
            collisions += 1;
        }
        max_error = max_error.max(d);
        pairs.push((i, j, d));
    }
    Ok(SpectrumMatch {
        pairs,
        max_error,
        collisions,
    })
}

/// Largest imaginary part among eigenvalues, as a measure of how far a
/// spectrum is from real.
pub fn max_imag<T: Real>(values: &[num_complex::Complex<T>]) -> T {
    values.iter().fold(T::zero(), |m, z| {
        let a = rabs(z.im);
        if a > m {
            a
        } else {
            m
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{adiabatic_embedding, iterate_bloch, perturbative_bloch, BlochMethod, IterationOptions};
    use crate::matrixkit::{general_eig, hermitian_deviation, hermitian_eig, NormKind};
    use crate::partition::partition_hamiltonian;
    use crate::presets::lambda_system;
    use crate::scalar::from_real_rows;

    fn lambda() -> (CMatrix<f64>, PartitionedHamiltonian<f64>) {
        let h = lambda_system::<f64>(-0.0175, 1.0, (0.4, 0.0), (0.3, 0.0));
        let ph = partition_hamiltonian(&h, &[0, 1]).unwrap();
        (h, ph)
    }

    #[test]
    fn adiabatic_lambda_example() {
        let (_, ph) = lambda();
        let h = adiabatic_hamiltonian(&ph);
        let expect = from_real_rows::<f64>(&[&[-0.03125, -0.03], &[-0.03, -0.03125]]);
        assert!((h - expect).norm() < 1e-16);
        let free = ph.with_coupling(CMatrix::zeros(1, 2)).unwrap();
        assert_eq!(adiabatic_hamiltonian(&free), *free.omega());
    }

    #[test]
    fn nonhermitian_orders() {
        let (_, ph) = lambda();
        let ad = adiabatic_embedding(&ph);
        let h0 = nonhermitian_effective(&ph, &ad).unwrap();
        assert!((h0 - adiabatic_hamiltonian(&ph)).norm() < 1e-16);
        let two = perturbative_bloch(&ph, 2).unwrap();
        let h2 = nonhermitian_effective(&ph, &two).unwrap();
        assert!(hermitian_deviation(&h2) > 1e-6);
    }

    #[test]
    fn converged_spectra_inside_full() {
        let (h, ph) = lambda();
        let it = iterate_bloch(&ph, IterationOptions::default()).unwrap();
        let eo = hermitian_effective(&ph, &it).unwrap();
        let full = hermitian_eig(&h).unwrap().real_values();
        let nh = general_eig(&eo.h_nonhermitian).unwrap();
        assert!(max_imag(&nh.values) < 1e-9);
        let cand: Vec<f64> = nh.real_values();
        let m = match_spectra(&cand, &full).unwrap();
        assert!(m.max_error < 1e-9, "{m:?}");
        assert_eq!(m.collisions, 0);
        let herm = hermitian_eig(&eo.h_hermitian).unwrap().real_values();
        let m = match_spectra(&herm, &full).unwrap();
        assert!(m.max_error < 1e-9);
        assert!(h1_hermiticity_defect(&ph, it.b()).unwrap() < 1e-11);

        for (lambda, v) in nh.values.iter().zip(nh.vectors.column_iter()) {
            let psi = reconstruct_full_eigenvector(it.b(), &v.into_owned()).unwrap();
            let psi = ph.from_block_order(&psi);
            let r = &h * &psi - psi.scale(lambda.re);
            assert!(r.norm() < 1e-8);
        }
    }

    #[test]
    fn hermitized_zero_b_is_omega() {
        let (_, ph) = lambda();
        let (h, s) = hermitian_from_b(&ph, &CMatrix::zeros(1, 2)).unwrap();
        assert_eq!(h, *ph.omega());
        assert_eq!(s, CMatrix::identity(2, 2));
    }

    #[test]
    fn hermitized_similarity_for_exact_b() {
        let (_, ph) = lambda();
        let it = iterate_bloch(&ph, IterationOptions::default()).unwrap();
        assert_eq!(it.method, BlochMethod::Iterative);
        let eo = hermitian_effective(&ph, &it).unwrap();
        let sim = &eo.s_b * &eo.h_nonhermitian * eo.s_b_inverse().unwrap();
        assert!((sim - &eo.h_hermitian).norm() < 1e-12);
    }

    #[test]
    fn second_order_special_cases() {
        let (_, ph) = lambda();
        let free = ph.with_coupling(CMatrix::zeros(1, 2)).unwrap();
        assert_eq!(second_order_hamiltonian(&free), *free.omega());
        let flat = PartitionedHamiltonian::from_blocks(
            CMatrix::zeros(2, 2),
            ph.delta().clone(),
            ph.coupling().clone(),
        )
        .unwrap();
        let expect = -(flat.coupling().adjoint() * flat.delta_inv() * flat.coupling());
        assert!((second_order_hamiltonian(&flat) - expect).norm() < 1e-17);
    }

    #[test]
    fn second_order_matches_hermitized_series() {
        // The difference between h⁽²⁾ and the hermitized order-2 series is
        // O(Δ⁻³); the adiabatic one differs at O(Δ⁻²).
        let (_, ph) = lambda();
        let errs: Vec<f64> = [8.0, 16.0]
            .iter()
            .map(|&s| {
                let scaled = ph.with_fast_scaled(s).unwrap();
                let b = perturbative_bloch(&scaled, 2).unwrap();
                let (h, _) = hermitian_from_b(&scaled, b.b()).unwrap();
                crate::matrixkit::norm(&(h - second_order_hamiltonian(&scaled)), NormKind::Spectral)
            })
            .collect();
        let slope = (errs[1] / errs[0]).log2();
        assert!(slope < -2.7, "slope {slope}");
    }

    #[test]
    fn reconstruct_examples() {
        let b = CMatrix::<f64>::zeros(1, 2);
        let alpha = CVector::from_vec(vec![cr(1.0), cr(0.0)]);
        let psi = reconstruct_full_eigenvector(&b, &alpha).unwrap();
        assert_eq!(psi.len(), 3);
        assert_eq!(psi[0], cr(1.0));
        assert!(matches!(
            reconstruct_full_eigenvector(&b, &CVector::zeros(2)),
            Err(Error::ZeroVector)
        ));
        // ‖(α, Bα)‖² = ⟨α, (1 + B†B)α⟩.
        let b = from_real_rows::<f64>(&[&[0.3, -0.4]]);
        let alpha = CVector::from_vec(vec![cr(0.6), cr(0.8)]);
        let gamma = &b * &alpha;
        let raw = alpha.norm_squared() + gamma.norm_squared();
        let metric = CMatrix::<f64>::identity(2, 2) + b.adjoint() * &b;
        let quad = (alpha.adjoint() * metric * &alpha)[(0, 0)].re;
        assert!((raw - quad).abs() < 1e-15);
    }

    #[test]
    fn matching_counts_collisions() {
        let m = match_spectra(&[0.0, 0.1], &[0.05, 1.0]).unwrap();
        assert_eq!(m.collisions, 1);
        let m = match_spectra(&[1.0, 0.0], &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(m.pairs, vec![(0, 1, 0.0), (1, 0, 0.0)]);
        assert!(match_spectra(&[0.0, 1.0], &[0.0]).is_err());
    }
}

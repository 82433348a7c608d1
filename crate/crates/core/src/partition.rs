//! Slow/fast block decomposition of a hermitian Hamiltonian.
//!
//! With `P` the projector onto the declared slow indices and `Q = 1 − P`, the
//! Hamiltonian is split into `ω = PHP` (p×p), `Δ = QHQ` (q×q) and the
//! coupling `Ω = QHP` (q×p), so that in slow-first ordering
//!
//! ```text
//! H = [ ω  Ω† ]
//!     [ Ω  Δ  ]
//! ```

use crate::error::{Error, Result};
use crate::matrixkit::{
    ensure_finite, ensure_square, hermitian_deviation, hermitian_eig, inverse, norm, rabs, NormKind,
};
use crate::scalar::{CMatrix, Real};

/// Relative hermiticity tolerance applied to every block.
pub const PARTITION_HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PartitionedHamiltonian<T: Real> {
    omega: CMatrix<T>,
    delta: CMatrix<T>,
    coupling: CMatrix<T>,
    delta_inv: CMatrix<T>,
    slow_indices: Vec<usize>,
    fast_indices: Vec<usize>,
}

fn check_hermitian<T: Real>(a: &CMatrix<T>) -> Result<()> {
    ensure_square(a)?;
    ensure_finite(a)?;
    let dev = hermitian_deviation(a);
    if dev > T::tol(PARTITION_HERMITIAN_TOL) * a.norm() {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    Ok(())
}

fn invert_fast<T: Real>(delta: &CMatrix<T>) -> Result<CMatrix<T>> {
    inverse(delta).map_err(|e| match e {
        Error::SingularMatrix { rcond } => Error::SingularFastBlock {
            rcond,
            harmonic: None,
        },
        other => other,
    })
}

/// Splits `h` into blocks, taking `slow_indices` (in the given order) as the
/// slow sector and the remaining indices, ascending, as the fast sector.
pub fn partition_hamiltonian<T: Real>(
    h: &CMatrix<T>,
    slow_indices: &[usize],
) -> Result<PartitionedHamiltonian<T>> {
    check_hermitian(h)?;
    let n = h.nrows();
    let mut seen = vec![false; n];
    for &i in slow_indices {
        if i >= n {
            return Err(Error::InvalidIndices(format!(
                "index {i} out of range for dimension {n}"
            )));
        }
        if seen[i] {
            return Err(Error::InvalidIndices(format!("index {i} repeated")));
        }
        seen[i] = true;
    }
    if slow_indices.is_empty() || slow_indices.len() == n {
        return Err(Error::EmptyPartition);
    }
    let fast_indices: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
    let pick = |rows: &[usize], cols: &[usize]| {
        CMatrix::from_fn(rows.len(), cols.len(), |i, j| h[(rows[i], cols[j])])
    };
    let omega = pick(slow_indices, slow_indices);
    let delta = pick(&fast_indices, &fast_indices);
    let coupling = pick(&fast_indices, slow_indices);
    let delta_inv = invert_fast(&delta)?;
    Ok(PartitionedHamiltonian {
        omega,
        delta,
        coupling,
        delta_inv,
        slow_indices: slow_indices.to_vec(),
        fast_indices,
    })
}

impl<T: Real> PartitionedHamiltonian<T> {
    /// Builds a partition directly from blocks; the slow sector occupies the
    /// first `p` indices.
    pub fn from_blocks(omega: CMatrix<T>, delta: CMatrix<T>, coupling: CMatrix<T>) -> Result<Self> {
        check_hermitian(&omega)?;
        check_hermitian(&delta)?;
        ensure_finite(&coupling)?;
        let (p, q) = (omega.nrows(), delta.nrows());
        if p == 0 || q == 0 {
            return Err(Error::EmptyPartition);
        }
        crate::matrixkit::ensure_shape(&coupling, q, p)?;
        let delta_inv = invert_fast(&delta)?;
        Ok(PartitionedHamiltonian {
            omega,
            delta,
            coupling,
            delta_inv,
            slow_indices: (0..p).collect(),
            fast_indices: (p..p + q).collect(),
        })
    }

    pub fn omega(&self) -> &CMatrix<T> {
        &self.omega
    }

    pub fn delta(&self) -> &CMatrix<T> {
        &self.delta
    }

    /// The coupling block `Ω = QHP` (q×p).
    pub fn coupling(&self) -> &CMatrix<T> {
        &self.coupling
    }

    pub fn delta_inv(&self) -> &CMatrix<T> {
        &self.delta_inv
    }

    pub fn slow_dim(&self) -> usize {
        self.omega.nrows()
    }

    pub fn fast_dim(&self) -> usize {
        self.delta.nrows()
    }

    pub fn dim(&self) -> usize {
        self.slow_dim() + self.fast_dim()
    }

    pub fn slow_indices(&self) -> &[usize] {
        &self.slow_indices
    }

    pub fn fast_indices(&self) -> &[usize] {
        &self.fast_indices
    }

    /// The full Hamiltonian in slow-first block order.
    pub fn block_matrix(&self) -> CMatrix<T> {
        let (p, q) = (self.slow_dim(), self.fast_dim());
        let mut h = CMatrix::zeros(p + q, p + q);
        h.view_mut((0, 0), (p, p)).copy_from(&self.omega);
        h.view_mut((p, p), (q, q)).copy_from(&self.delta);
        h.view_mut((p, 0), (q, p)).copy_from(&self.coupling);
        h.view_mut((0, p), (p, q)).copy_from(&self.coupling.adjoint());
        h
    }

    /// The full Hamiltonian in the original index order.
    pub fn reassemble(&self) -> CMatrix<T> {
        let blocks = self.block_matrix();
        let order: Vec<usize> = self
            .slow_indices
            .iter()
            .chain(&self.fast_indices)
            .copied()
            .collect();
        let n = order.len();
        let mut h = CMatrix::zeros(n, n);
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                h[(i, j)] = blocks[(a, b)];
            }
        }
        h
    }

    /// Copy with the fast block scaled, `Δ → sΔ`.
    pub fn with_fast_scaled(&self, s: T) -> Result<Self> {
        let mut scaled = self.clone();
        scaled.delta = self.delta.scale(s);
        scaled.delta_inv = invert_fast(&scaled.delta)?;
        Ok(scaled)
    }

    /// Copy with the coupling block replaced.
    pub fn with_coupling(&self, coupling: CMatrix<T>) -> Result<Self> {
        crate::matrixkit::ensure_shape(&coupling, self.fast_dim(), self.slow_dim())?;
        ensure_finite(&coupling)?;
        let mut out = self.clone();
        out.coupling = coupling;
        Ok(out)
    }

    /// Embeds a (p+q) state given in original index order into slow-first order.
    pub fn to_block_order(&self, v: &crate::CVector<T>) -> crate::CVector<T> {
        let order: Vec<usize> = self
            .slow_indices
            .iter()
            .chain(&self.fast_indices)
            .copied()
            .collect();
        crate::CVector::from_fn(order.len(), |a, _| v[order[a]])
    }

    /// Inverse of [`to_block_order`](Self::to_block_order).
    pub fn from_block_order(&self, v: &crate::CVector<T>) -> crate::CVector<T> {
        let mut out = crate::CVector::zeros(v.len());
        for (a, &i) in self.slow_indices.iter().chain(&self.fast_indices).enumerate() {
            out[i] = v[a];
        }
        out
    }
}

/// Smallness parameters `ε = ‖Δ⁻¹‖‖ω‖`, `ε′ = ‖Δ⁻¹‖‖Ω‖` and the radius of
/// the ball that the Bloch map sends into itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingScales<T: Real> {
    pub epsilon: T,
    pub epsilon_prime: T,
    /// Larger root of `ε′x² + (ε − 1)x + ε′ = 0`; absent when the hypothesis
    /// `ε < 1, ε′ ≤ (1 − ε)/2` fails, infinite when `ε′ = 0`.
    pub radius: Option<T>,
    /// Smaller root of the same quadratic (`1/radius`).
    pub inner_radius: Option<T>,
    /// Minimum distance between the spectra of `ω` and `Δ`, a diagnostic only.
    pub spectral_gap: T,
    pub norm: NormKind,
}

impl<T: Real> CouplingScales<T> {
    pub fn hypothesis_holds(&self) -> bool {
        self.radius.is_some()
    }

    /// Human-readable diagnostic for stderr.
    pub fn diagnostic(&self) -> String {
        match self.radius {
            Some(r) => format!(
                "eps = {:.6e}, eps' = {:.6e}, r = {:.6e}, spectral gap = {:.6e}",
                self.epsilon.as_f64(),
                self.epsilon_prime.as_f64(),
                r.as_f64(),
                self.spectral_gap.as_f64()
            ),
            None => format!(
                "eps = {:.6e}, eps' = {:.6e}: contraction hypothesis eps' <= (1 - eps)/2 violated; spectral gap = {:.6e}",
                self.epsilon.as_f64(),
                self.epsilon_prime.as_f64(),
                self.spectral_gap.as_f64()
            ),
        }
    }
}

/// The pair `(r, 1/r)` of roots of `ε′x² + (ε − 1)x + ε′`, or `None` outside
/// the admissible region.
pub fn contraction_radii<T: Real>(epsilon: T, epsilon_prime: T) -> Option<(T, T)> {
    let zero = T::zero();
    let one = T::one();
    if epsilon < zero || epsilon_prime < zero || epsilon >= one {
        return None;
    }
    let half_gap = (one - epsilon) / T::lit(2.0);
    if epsilon_prime > half_gap {
        return None;
    }
    if epsilon_prime == zero {
        return Some((T::infinity(), zero));
    }
    let b = half_gap / epsilon_prime;
    let disc = b * b - one;
    let disc = if disc < zero { zero } else { disc };
    let r = b + disc.sqrt();
    Some((r, one / r))
}

pub fn coupling_scales<T: Real>(ph: &PartitionedHamiltonian<T>, kind: NormKind) -> CouplingScales<T> {
    let inv_norm = norm(ph.delta_inv(), kind);
    let epsilon = inv_norm * norm(ph.omega(), kind);
    let epsilon_prime = inv_norm * norm(ph.coupling(), kind);
    let radii = contraction_radii(epsilon, epsilon_prime);
    CouplingScales {
        epsilon,
        epsilon_prime,
        radius: radii.map(|r| r.0),
        inner_radius: radii.map(|r| r.1),
        spectral_gap: spectral_gap(ph),
        norm: kind,
    }
}

fn spectral_gap<T: Real>(ph: &PartitionedHamiltonian<T>) -> T {
    let (Ok(a), Ok(b)) = (hermitian_eig(ph.omega()), hermitian_eig(ph.delta())) else {
        return T::zero();
    };
    let mut gap = T::infinity();
    for x in &a.values {
        for y in &b.values {
            let d = rabs(x.re - y.re);
            if d < gap {
                gap = d;
            }
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::lambda_system;
    use crate::scalar::from_real_rows;

    #[test]
    fn lambda_blocks() {
        let h = lambda_system::<f64>(-0.0175, 1.0, (0.4, 0.0), (0.3, 0.0));
        let ph = partition_hamiltonian(&h, &[0, 1]).unwrap();
        let w = ph.omega();
        assert_eq!(w[(0, 0)].re, 0.00875);
        assert_eq!(w[(1, 1)].re, -0.00875);
        assert_eq!(w[(0, 1)].re, 0.0);
        assert_eq!(ph.delta()[(0, 0)].re, 1.0);
        assert_eq!(ph.coupling()[(0, 0)].re, 0.2);
        assert_eq!(ph.coupling()[(0, 1)].re, 0.15);
        assert_eq!(ph.reassemble(), h);
    }

    #[test]
    fn block_diagonal_input() {
        let h = from_real_rows::<f64>(&[&[1.0, 0.0], &[0.0, 100.0]]);
        let ph = partition_hamiltonian(&h, &[0]).unwrap();
        assert_eq!(ph.omega()[(0, 0)].re, 1.0);
        assert_eq!(ph.delta()[(0, 0)].re, 100.0);
        assert_eq!(ph.coupling()[(0, 0)].re, 0.0);
        let s = coupling_scales(&ph, NormKind::Spectral);
        assert_eq!(s.epsilon_prime, 0.0);
        assert_eq!(s.radius, Some(f64::INFINITY));
    }

    #[test]
    fn partition_errors() {
        let h = from_real_rows::<f64>(&[&[1.0, 0.0], &[0.0, 100.0]]);
        assert!(matches!(
            partition_hamiltonian(&h, &[0, 1]),
            Err(Error::EmptyPartition)
        ));
        assert!(matches!(partition_hamiltonian(&h, &[]), Err(Error::EmptyPartition)));
        assert!(matches!(
            partition_hamiltonian(&h, &[2]),
            Err(Error::InvalidIndices(_))
        ));
        let nh = from_real_rows::<f64>(&[&[1.0, 1.0], &[0.0, 100.0]]);
        assert!(matches!(
            partition_hamiltonian(&nh, &[0]),
            Err(Error::NotHermitian { .. })
        ));
        let singular = from_real_rows::<f64>(&[&[1.0, 0.5], &[0.5, 0.0]]);
        assert!(matches!(
            partition_hamiltonian(&singular, &[0]),
            Err(Error::SingularFastBlock { .. })
        ));
    }

    #[test]
    fn permuted_slow_indices_round_trip() {
        let h = from_real_rows::<f64>(&[
            &[5.0, 0.1, 0.2, 0.0],
            &[0.1, 0.0, 0.3, 0.4],
            &[0.2, 0.3, 6.0, 0.5],
            &[0.0, 0.4, 0.5, -0.2],
        ]);
        let ph = partition_hamiltonian(&h, &[3, 1]).unwrap();
        assert_eq!(ph.fast_indices(), &[0, 2]);
        assert_eq!(ph.omega()[(0, 1)].re, 0.4);
        assert_eq!(ph.reassemble(), h);
    }

    #[test]
    fn radius_examples() {
        // Larger root of 0.3x² − 0.8x + 0.3 = 0 is (0.8 + √0.28)/0.6.
        let (r, inner) = contraction_radii(0.2f64, 0.3).unwrap();
        let oracle = (0.8 + 0.28f64.sqrt()) / 0.6;
        assert!((r - oracle).abs() < 1e-14);
        assert!((r - 2.21525).abs() < 1e-5);
        assert!((0.3 * r * r - 0.8 * r + 0.3).abs() < 1e-13);
        assert!((r * inner - 1.0).abs() < 1e-15);
        assert_eq!(contraction_radii(0.0f64, 0.5).unwrap().0, 1.0);
        assert!(contraction_radii(0.5f64, 0.4).is_none());
        assert!(contraction_radii(1.0f64, 0.0).is_none());
    }
}

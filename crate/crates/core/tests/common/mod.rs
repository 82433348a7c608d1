#![allow(dead_code)]

use effham::matrixkit::{hermitian_eig, inverse, norm, NormKind};
use effham::partition::PartitionedHamiltonian;
use effham::scalar::{c, CMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix<f64> {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix<f64> {
    let a = random_complex(rng, n, n);
    (&a + a.adjoint()).scale(0.5)
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix<f64> {
    let a = random_complex(rng, n, n);
    a.qr().q()
}

/// Fast block with eigenvalues of modulus in `[1, 3]` and random signs.
pub fn random_fast_block(rng: &mut impl Rng, q: usize) -> CMatrix<f64> {
    let u = random_unitary(rng, q);
    let d = CMatrix::from_fn(q, q, |i, j| {
        if i == j {
            let m: f64 = rng.random_range(1.0..3.0);
            c(if rng.random_bool(0.5) { m } else { -m }, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    &u * d * u.adjoint()
}

/// A random partitioned system with prescribed `ε` and `ε′` in the spectral norm.
pub fn instance_with(rng: &mut impl Rng, p: usize, q: usize, eps: f64, eps_p: f64) -> PartitionedHamiltonian<f64> {
    let delta = random_fast_block(rng, q);
    let inv_norm = norm(&inverse(&delta).unwrap(), NormKind::Spectral);
    let mut omega = random_hermitian(rng, p);
    let wn = norm(&omega, NormKind::Spectral);
    omega = if wn > 0.0 { omega.scale(eps / (inv_norm * wn)) } else { omega };
    let mut coupling = random_complex(rng, q, p);
    let cn = norm(&coupling, NormKind::Spectral);
    coupling = coupling.scale(eps_p / (inv_norm * cn));
    PartitionedHamiltonian::from_blocks(omega, delta, coupling).unwrap()
}

/// Random sizes `p, q ≤ 8` and smallness with `ε + 2ε′ ≤ budget`.
pub fn random_instance(rng: &mut impl Rng, budget: f64) -> PartitionedHamiltonian<f64> {
    let p = rng.random_range(1..=8);
    let q = rng.random_range(1..=8);
    let eps = rng.random_range(0.0..budget);
    let eps_p = rng.random_range(0.0..(budget - eps) / 2.0);
    instance_with(rng, p, q, eps, eps_p)
}

#[derive(Debug)]
pub enum OracleError {
    /// The `p`-th and `(p+1)`-th slow weights are too close to classify.
    Ambiguous { gap: f64 },
}

/// Exact `B` from a dense eigendecomposition of the full Hamiltonian: the `p`
/// eigenvectors with the largest slow-sector weight give `B = X_Q X_P⁻¹`.
pub fn brute_force_b(ph: &PartitionedHamiltonian<f64>) -> Result<CMatrix<f64>, OracleError> {
    let h = ph.block_matrix();
    let eig = hermitian_eig(&h).unwrap();
    let p = ph.slow_dim();
    let q = ph.fast_dim();
    let mut order: Vec<(f64, usize)> = eig
        .vectors
        .column_iter()
        .enumerate()
        .map(|(j, v)| (v.rows(0, p).norm_squared(), j))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let gap = order[p - 1].0 - order[p].0;
    if gap < 0.2 {
        return Err(OracleError::Ambiguous { gap });
    }
    let cols: Vec<usize> = order[..p].iter().map(|x| x.1).collect();
    let x = CMatrix::from_fn(p + q, p, |i, j| eig.vectors[(i, cols[j])]);
    let xp = x.rows(0, p).into_owned();
    let xq = x.rows(p, q).into_owned();
    Ok(xq * inverse(&xp).unwrap())
}

/// Eigenvalues of the full Hamiltonian, ascending.
pub fn full_spectrum(ph: &PartitionedHamiltonian<f64>) -> Vec<f64> {
    hermitian_eig(&ph.block_matrix()).unwrap().real_values()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

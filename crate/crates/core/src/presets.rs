//! Model Hamiltonians used throughout the examples and tests.

use crate::error::Result;
use crate::floquet::FloquetSpec;
use crate::scalar::{c, clit, cr, CMatrix, Real};

/// Three-level Λ system in the basis `(α, β, γ)`:
///
/// ```text
/// [ −δ/2    0     Ω̃a*/2 ]
/// [  0     δ/2    Ω̃b*/2 ]
/// [ Ω̃a/2  Ω̃b/2   Δ     ]
/// ```
///
/// Rabi frequencies are `(re, im)` pairs. The natural partition takes
/// `{0, 1}` as the slow sector.
pub fn lambda_system<T: Real>(
    two_photon_detuning: f64,
    detuning: f64,
    rabi_a: (f64, f64),
    rabi_b: (f64, f64),
) -> CMatrix<T> {
    let mut h = CMatrix::<T>::zeros(3, 3);
    let half = T::lit(0.5);
    let oa = clit::<T>(rabi_a.0, rabi_a.1) * half;
    let ob = clit::<T>(rabi_b.0, rabi_b.1) * half;
    h[(0, 0)] = cr(-T::lit(two_photon_detuning) * half);
    h[(1, 1)] = cr(T::lit(two_photon_detuning) * half);
    h[(2, 2)] = cr(T::lit(detuning));
    h[(2, 0)] = oa;
    h[(2, 1)] = ob;
    h[(0, 2)] = oa.conj();
    h[(1, 2)] = ob.conj();
    h
}

/// Component labels of [`lambda_system`].
pub const LAMBDA_LABELS: [&str; 3] = ["alpha", "beta", "gamma"];

pub fn sigma_z<T: Real>() -> CMatrix<T> {
    let mut m = CMatrix::<T>::zeros(2, 2);
    m[(0, 0)] = cr(T::one());
    m[(1, 1)] = cr(-T::one());
    m
}

pub fn sigma_x<T: Real>() -> CMatrix<T> {
    let mut m = CMatrix::<T>::zeros(2, 2);
    m[(0, 1)] = cr(T::one());
    m[(1, 0)] = cr(T::one());
    m
}

pub fn sigma_y<T: Real>() -> CMatrix<T> {
    let mut m = CMatrix::<T>::zeros(2, 2);
    m[(0, 1)] = c(T::zero(), -T::one());
    m[(1, 0)] = c(T::zero(), T::one());
    m
}

/// Raising operator `σ⁺ = |↑⟩⟨↓|` (basis order ↑, ↓).
pub fn sigma_plus<T: Real>() -> CMatrix<T> {
    let mut m = CMatrix::<T>::zeros(2, 2);
    m[(0, 1)] = cr(T::one());
    m
}

pub fn sigma_minus<T: Real>() -> CMatrix<T> {
    sigma_plus::<T>().adjoint()
}

/// Driven qubit `H(t) = (Δ/2)σᶻ + g(σ⁺e^{iωt} + σ⁻e^{−iωt})`.
///
/// With the Fourier convention `H(t) = Σ_k H_k e^{−ikωt}` this is
/// `H₀ = (Δ/2)σᶻ`, `H₋₁ = gσ⁺`, `H₊₁ = gσ⁻`.
pub fn driven_qubit<T: Real>(omega_drive: f64, g: f64, detuning: f64) -> Result<FloquetSpec<T>> {
    let g = T::lit(g);
    FloquetSpec::new(
        T::lit(omega_drive),
        vec![
            (0, sigma_z::<T>().scale(T::lit(detuning / 2.0))),
            (-1, sigma_plus::<T>().scale(g)),
            (1, sigma_minus::<T>().scale(g)),
        ],
    )
}

/// Exact quasi-energies `∓[ω/2 − √((ω + Δ)²/4 + g²)]` of [`driven_qubit`],
/// unfolded, in the order `(−, +)` of the sign prefactor.
pub fn driven_qubit_exact_quasi_energies(omega_drive: f64, g: f64, detuning: f64) -> [f64; 2] {
    let root = ((omega_drive + detuning).powi(2) / 4.0 + g * g).sqrt();
    let x = omega_drive / 2.0 - root;
    [-x, x]
}

//! Periodic Hamiltonians `H(t) = Σ_k H_k e^{−ikωt}` and their quasi-energies.
//!
//! The truncated Floquet operator acts on `system ⊗ harmonics`, harmonics
//! `m ∈ [−N, N]`, with block `(m′, m)` equal to `H_{m′−m} − mω δ_{m′m}`.
//! Its spectrum contains every quasi-energy repeated at spacing `ω`; the
//! zero-harmonic sector plays the role of the slow subspace.
//!
//! Fourier convention: for the driven qubit
//! `H(t) = (Δ/2)σᶻ + g(σ⁺e^{iωt} + σ⁻e^{−iωt})` the components are
//! `H₀ = (Δ/2)σᶻ`, `H₋₁ = gσ⁺`, `H₊₁ = gσ⁻`.

use std::collections::BTreeMap;

use nalgebra::ComplexField;

use crate::bloch::bloch_iterate;
use crate::effective::{adiabatic_hamiltonian, hermitian_from_b};
use crate::error::{Error, Result};
use crate::matrixkit::{
    ensure_finite, ensure_square, general_eigenvalues, hermitian_deviation, hermitian_eig,
    hermitian_part, rabs, spectral_norm, sylvester_solve, unitarity_deviation, unitary_propagator,
};
use crate::partition::{partition_hamiltonian, PartitionedHamiltonian};
use crate::scalar::{c, cr, CMatrix, Real};
use crate::schriefferwolff::sw_hamiltonian_from;

/// Relative tolerance for `H_k† = H_{−k}`.
pub const PAIRING_TOL: f64 = 1e-12;
pub const DEFAULT_CUTOFF: usize = 32;
pub const MAX_AUTO_CUTOFF: usize = 256;
pub const CUTOFF_SHIFT_TOL: f64 = 1e-10;
/// Largest `‖U†U − 1‖` accepted for a one-period propagator.
pub const MONODROMY_UNITARITY_TOL: f64 = 1e-8;
pub const STEP_UNITARITY_TOL: f64 = 1e-10;
/// Floor for the default number of integration steps per period.
pub const MIN_DEFAULT_STEPS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetSpec<T: Real> {
    dim: usize,
    omega_drive: T,
    components: BTreeMap<i32, CMatrix<T>>,
}

impl<T: Real> FloquetSpec<T> {
    /// Validates shapes, `ω > 0`, hermiticity of `H₀` and the pairing
    /// `H_k† = H_{−k}`. A missing `H₀` is taken as zero.
    pub fn new(omega_drive: T, components: Vec<(i32, CMatrix<T>)>) -> Result<Self> {
        if !(omega_drive > T::zero()) || !omega_drive.is_finite_value() {
            return Err(Error::InvalidFloquetSpec(format!(
                "drive frequency must be positive and finite, got {omega_drive}"
            )));
        }
        let mut map = BTreeMap::new();
        let mut dim = None;
        for (k, h) in components {
            ensure_square(&h)?;
            ensure_finite(&h)?;
            if *dim.get_or_insert(h.nrows()) != h.nrows() {
                return Err(Error::InvalidFloquetSpec(format!(
                    "component {k} has dimension {}, expected {}",
                    h.nrows(),
                    dim.unwrap()
                )));
            }
            if map.insert(k, h).is_some() {
                return Err(Error::InvalidFloquetSpec(format!("component {k} given twice")));
            }
        }
        let dim = dim.ok_or_else(|| Error::InvalidFloquetSpec("no components".into()))?;
        if dim == 0 {
            return Err(Error::InvalidFloquetSpec("zero-dimensional system".into()));
        }
        map.entry(0).or_insert_with(|| CMatrix::zeros(dim, dim));
        for (&k, h) in &map {
            let partner = map.get(&-k).ok_or_else(|| {
                Error::InvalidFloquetSpec(format!("component {k} has no partner {}", -k))
            })?;
            let dev = (h.adjoint() - partner).norm();
            let scale = crate::matrixkit::rmax(h.norm(), T::one());
            if dev > T::tol(PAIRING_TOL) * scale {
                return Err(Error::InvalidFloquetSpec(format!(
                    "H_{k}^dagger differs from H_{} by {:.3e}",
                    -k,
                    dev.as_f64()
                )));
            }
        }
        Ok(FloquetSpec {
            dim,
            omega_drive,
            components: map,
        })
    }

    /// A time-independent spec with only `H₀`.
    pub fn static_hamiltonian(omega_drive: T, h0: CMatrix<T>) -> Result<Self> {
        if hermitian_deviation(&h0) > T::tol(PAIRING_TOL) * h0.norm() {
            return Err(Error::NotHermitian {
                deviation: hermitian_deviation(&h0).as_f64(),
            });
        }
        Self::new(omega_drive, vec![(0, h0)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega_drive(&self) -> T {
        self.omega_drive
    }

    pub fn period(&self) -> T {
        T::two_pi() / self.omega_drive
    }

    pub fn components(&self) -> &BTreeMap<i32, CMatrix<T>> {
        &self.components
    }

    pub fn component(&self, k: i32) -> Option<&CMatrix<T>> {
        self.components.get(&k)
    }

    pub fn h0(&self) -> &CMatrix<T> {
        &self.components[&0]
    }

    pub fn max_harmonic(&self) -> usize {
        self.components
            .iter()
            .filter(|(_, h)| h.norm() > T::zero())
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// The same components at a different drive frequency.
    pub fn with_omega(&self, omega_drive: T) -> Result<Self> {
        Self::new(omega_drive, self.components.clone().into_iter().collect())
    }

    /// `H(t) = Σ_k H_k e^{−ikωt}`, hermitized.
    pub fn hamiltonian_at(&self, t: T) -> CMatrix<T> {
        let mut h = CMatrix::<T>::zeros(self.dim, self.dim);
        for (&k, hk) in &self.components {
            let phase = -T::lit(k as f64) * self.omega_drive * t;
            h += hk * c(ComplexField::cos(phase), ComplexField::sin(phase));
        }
        hermitian_part(&h)
    }

    /// `Σ_k ‖H_k‖`, a bound on `sup_t ‖H(t)‖`.
    pub fn norm_bound(&self) -> T {
        self.components
            .values()
            .fold(T::zero(), |acc, h| acc + spectral_norm(h))
    }
}

/// The Floquet operator on harmonics `m ∈ [−N, N]`, row `(m + N)·d + i`.
#[derive(Debug, Clone)]
pub struct TruncatedFloquetOperator<T: Real> {
    pub cutoff: usize,
    pub dim: usize,
    pub omega_drive: T,
    pub matrix: CMatrix<T>,
}

impl<T: Real> TruncatedFloquetOperator<T> {
    pub fn index(&self, m: i64, i: usize) -> usize {
        ((m + self.cutoff as i64) as usize) * self.dim + i
    }

    /// Inverse of [`index`](Self::index): `(m, i)` for a row.
    pub fn harmonic_of(&self, row: usize) -> (i64, usize) {
        ((row / self.dim) as i64 - self.cutoff as i64, row % self.dim)
    }

    pub fn zero_harmonic_indices(&self) -> Vec<usize> {
        (0..self.dim).map(|i| self.index(0, i)).collect()
    }
}

pub fn build_floquet<T: Real>(spec: &FloquetSpec<T>, cutoff: usize) -> Result<TruncatedFloquetOperator<T>> {
    let max_harmonic = spec.max_harmonic();
    if cutoff < max_harmonic || cutoff == 0 {
        return Err(Error::CutoffTooSmall {
            cutoff,
            max_harmonic: max_harmonic.max(1),
        });
    }
    let d = spec.dim();
    let n = cutoff as i64;
    let size = d * (2 * cutoff + 1);
    let mut matrix = CMatrix::<T>::zeros(size, size);
    for mp in -n..=n {
        for m in -n..=n {
            let k = mp - m;
            let Some(hk) = i32::try_from(k).ok().and_then(|k| spec.component(k)) else {
                continue;
            };
            let mut block = hk.clone();
            if k == 0 {
                let shift = T::lit(m as f64) * spec.omega_drive();
                for i in 0..d {
                    block[(i, i)] -= cr(shift);
                }
            }
            let r = ((mp + n) as usize) * d;
            let col = ((m + n) as usize) * d;
            matrix.view_mut((r, col), (d, d)).copy_from(&block);
        }
    }
    Ok(TruncatedFloquetOperator {
        cutoff,
        dim: d,
        omega_drive: spec.omega_drive(),
        matrix: hermitian_part(&matrix),
    })
}

/// The harmonic `m ≠ 0` whose diagonal block `H₀ − mω` is closest to singular.
fn nearest_resonant_harmonic<T: Real>(tfo: &TruncatedFloquetOperator<T>) -> Option<i64> {
    let d = tfo.dim;
    let h0 = tfo.matrix.view((tfo.index(0, 0), tfo.index(0, 0)), (d, d)).into_owned();
    let eig = hermitian_eig(&h0).ok()?.real_values();
    let n = tfo.cutoff as i64;
    let mut best: Option<(T, i64)> = None;
    for m in (-n..=n).filter(|&m| m != 0) {
        let shift = T::lit(m as f64) * tfo.omega_drive;
        for &a in &eig {
            let dist = rabs(a - shift);
            if best.is_none_or(|(b, _)| dist < b) {
                best = Some((dist, m));
            }
        }
    }
    best.map(|b| b.1)
}

/// Partition with the zero harmonic as the slow sector.
pub fn floquet_partition<T: Real>(tfo: &TruncatedFloquetOperator<T>) -> Result<PartitionedHamiltonian<T>> {
    partition_hamiltonian(&tfo.matrix, &tfo.zero_harmonic_indices()).map_err(|e| match e {
        Error::SingularFastBlock { rcond, .. } => Error::SingularFastBlock {
            rcond,
            harmonic: nearest_resonant_harmonic(tfo),
        },
        other => other,
    })
}

/// `−Σ_{l=0}^{L} ω^{−(l+1)} [K_Q⁻¹V]^l K_Q⁻¹`, an approximation of
/// `(QH_FQ)⁻¹` in the fast ordering of [`floquet_partition`], where
/// `K_Q = diag(m)` and `V = QH_FQ + ωK_Q`.
pub fn restricted_inverse_series<T: Real>(tfo: &TruncatedFloquetOperator<T>, order: usize) -> Result<CMatrix<T>> {
    let ph = floquet_partition(tfo)?;
    let q = ph.fast_dim();
    let omega = tfo.omega_drive;
    let mut k_inv = CMatrix::<T>::zeros(q, q);
    let mut v = ph.delta().clone();
    for (row, &full) in ph.fast_indices().iter().enumerate() {
        let m = T::lit(tfo.harmonic_of(full).0 as f64);
        k_inv[(row, row)] = cr(T::one() / m);
        v[(row, row)] += cr(m * omega);
    }
    let x = (&k_inv * &v).unscale(omega);
    let mut term = k_inv.unscale(omega);
    let mut sum = term.clone();
    let mut prev = spectral_norm(&term);
    for l in 1..=order {
        term = &x * &term;
        let now = spectral_norm(&term);
        if now > prev {
            return Err(Error::SeriesDiverging { order: l });
        }
        prev = now;
        sum += &term;
    }
    Ok(-sum)
}

/// `H₀ + (1/ω) Σ_{k≠0} (1/k) H_{−k}H_k`.
pub fn first_order_floquet_hamiltonian<T: Real>(spec: &FloquetSpec<T>) -> CMatrix<T> {
    let mut h = spec.h0().clone();
    for (&k, hk) in spec.components() {
        if k == 0 {
            continue;
        }
        let partner = &spec.components()[&-k];
        h += (partner * hk).unscale(T::lit(k as f64) * spec.omega_drive());
    }
    hermitian_part(&h)
}

/// Blocks `𝒮₀^{(m)}` of the first-order generator, solving
/// `𝒮 H₀ − (H₀ − mω)𝒮 = H_m` for each harmonic in the support.
pub fn floquet_sw_generator<T: Real>(spec: &FloquetSpec<T>) -> Result<BTreeMap<i32, CMatrix<T>>> {
    let h0 = spec.h0();
    let d = spec.dim();
    let mut out = BTreeMap::new();
    for (&m, hm) in spec.components() {
        if m == 0 {
            continue;
        }
        let mut fast = h0.clone();
        let shift = T::lit(m as f64) * spec.omega_drive();
        for i in 0..d {
            fast[(i, i)] -= cr(shift);
        }
        out.insert(m, sylvester_solve(h0, &fast, hm)?);
    }
    Ok(out)
}

/// `H₀ + ½Σ_m (𝒮_m†H_m + H_m†𝒮_m)`.
pub fn floquet_sw_hamiltonian<T: Real>(spec: &FloquetSpec<T>) -> Result<CMatrix<T>> {
    let gen = floquet_sw_generator(spec)?;
    let d = spec.dim();
    let m_count = gen.len();
    if m_count == 0 {
        return Ok(spec.h0().clone());
    }
    let mut coupling = CMatrix::<T>::zeros(d * m_count, d);
    let mut script_s = CMatrix::<T>::zeros(d * m_count, d);
    for (row, (m, s)) in gen.iter().enumerate() {
        coupling.view_mut((row * d, 0), (d, d)).copy_from(&spec.components()[m]);
        script_s.view_mut((row * d, 0), (d, d)).copy_from(s);
    }
    Ok(sw_hamiltonian_from(spec.h0(), &coupling, &script_s))
}

/// Fold into the zone `(−ω/2, ω/2]`.
pub fn fold_quasi_energy<T: Real>(x: T, omega: T) -> T {
    let half = omega / T::lit(2.0);
    let k = ((x - half) / omega).ceil();
    let mut r = x - k * omega;
    if r <= -half {
        r += omega;
    }
    if r > half {
        r -= omega;
    }
    r
}

/// Zone distance between two quasi-energies.
pub fn zone_distance<T: Real>(a: T, b: T, omega: T) -> T {
    rabs(fold_quasi_energy(a - b, omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveMethod {
    Adiabatic,
    /// Hermitized effective Hamiltonian from `k` Bloch iterations.
    BlochOrder(usize),
    SwFirst,
}

impl EffectiveMethod {
    pub fn label(&self) -> String {
        match self {
            EffectiveMethod::Adiabatic => "adiabatic".into(),
            EffectiveMethod::BlochOrder(k) => format!("bloch{k}"),
            EffectiveMethod::SwFirst => "sw_first".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuasiEnergyMethod {
    Monodromy,
    FloquetDiag,
    Effective(EffectiveMethod),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiEnergySet<T: Real> {
    /// Folded into `(−ω/2, ω/2]`, ascending.
    pub values: Vec<T>,
    pub method: QuasiEnergyMethod,
    pub omega_drive: T,
    /// Harmonic cutoff used, if any.
    pub cutoff: Option<usize>,
}

fn folded_sorted<T: Real>(values: impl IntoIterator<Item = T>, omega: T) -> Vec<T> {
    let mut v: Vec<T> = values.into_iter().map(|x| fold_quasi_energy(x, omega)).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Exponential of the midpoint Hamiltonian per step; second order.
    #[default]
    Midpoint,
    /// Fourth-order commutator-free Magnus scheme with two Gauss nodes.
    Magnus4,
}

/// Propagator of one step `[t, t + dt]`.
pub fn step_propagator<T: Real>(spec: &FloquetSpec<T>, t: T, dt: T, integrator: Integrator) -> Result<CMatrix<T>> {
    match integrator {
        Integrator::Midpoint => unitary_propagator(&spec.hamiltonian_at(t + dt / T::lit(2.0)), dt),
        Integrator::Magnus4 => {
            let r3 = T::lit(3.0).sqrt();
            let c1 = T::lit(0.5) - r3 / T::lit(6.0);
            let c2 = T::lit(0.5) + r3 / T::lit(6.0);
            let a1 = (T::lit(3.0) - T::lit(2.0) * r3) / T::lit(12.0);
            let a2 = (T::lit(3.0) + T::lit(2.0) * r3) / T::lit(12.0);
            let h1 = spec.hamiltonian_at(t + c1 * dt);
            let h2 = spec.hamiltonian_at(t + c2 * dt);
            let first = unitary_propagator(&(h1.scale(a2) + h2.scale(a1)), dt)?;
            let second = unitary_propagator(&(h1.scale(a1) + h2.scale(a2)), dt)?;
            Ok(second * first)
        }
    }
}

/// `U(t₁, t₀)` from `steps` equal steps.
pub fn propagator<T: Real>(
    spec: &FloquetSpec<T>,
    t0: T,
    t1: T,
    steps: usize,
    integrator: Integrator,
) -> Result<CMatrix<T>> {
    let d = spec.dim();
    let steps = steps.max(1);
    let dt = (t1 - t0) / T::lit(steps as f64);
    let mut u = CMatrix::<T>::identity(d, d);
    for s in 0..steps {
        let t = t0 + T::lit(s as f64) * dt;
        u = step_propagator(spec, t, dt, integrator)? * u;
    }
    Ok(u)
}

/// Steps per period keeping `dt·‖H‖ ≤ 0.1`, never below [`MIN_DEFAULT_STEPS`].
pub fn default_steps_per_period<T: Real>(spec: &FloquetSpec<T>) -> usize {
    let needed = (spec.period() * spec.norm_bound() / T::lit(0.1)).as_f64().ceil();
    if needed.is_finite() {
        (needed as usize).max(MIN_DEFAULT_STEPS)
    } else {
        MIN_DEFAULT_STEPS
    }
}

/// The one-period propagator `U(2π/ω)`.
pub fn monodromy<T: Real>(spec: &FloquetSpec<T>, steps: usize, integrator: Integrator) -> Result<CMatrix<T>> {
    let u = propagator(spec, T::zero(), spec.period(), steps, integrator)?;
    let dev = unitarity_deviation(&u);
    if dev > T::tol(MONODROMY_UNITARITY_TOL) {
        return Err(Error::NonUnitaryMonodromy {
            deviation: dev.as_f64(),
        });
    }
    Ok(u)
}

/// Quasi-energies from the eigenphases `e^{−i2πε/ω}` of the monodromy matrix.
pub fn quasi_energies_monodromy<T: Real>(
    spec: &FloquetSpec<T>,
    steps: usize,
    integrator: Integrator,
) -> Result<QuasiEnergySet<T>> {
    let u = monodromy(spec, steps, integrator)?;
    let omega = spec.omega_drive();
    let values = general_eigenvalues(&u)?
        .into_iter()
        .map(|z| -z.argument() * omega / T::two_pi());
    Ok(QuasiEnergySet {
        values: folded_sorted(values, omega),
        method: QuasiEnergyMethod::Monodromy,
        omega_drive: omega,
        cutoff: None,
    })
}

/// Quasi-energies from the `d` eigenvectors of the truncated Floquet operator
/// with the largest weight on the zero harmonic.
pub fn quasi_energies_floquet_diag<T: Real>(spec: &FloquetSpec<T>, cutoff: usize) -> Result<QuasiEnergySet<T>> {
    let tfo = build_floquet(spec, cutoff)?;
    let eig = hermitian_eig(&tfo.matrix)?;
    let base = tfo.index(0, 0);
    let d = tfo.dim;
    let mut weighted: Vec<(T, T)> = eig
        .vectors
        .column_iter()
        .zip(eig.values.iter())
        .map(|(v, lambda)| {
            let w = v.rows(base, d).norm_squared();
            (w, lambda.re)
        })
        .collect();
    weighted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let omega = spec.omega_drive();
    Ok(QuasiEnergySet {
        values: folded_sorted(weighted.into_iter().take(d).map(|x| x.1), omega),
        method: QuasiEnergyMethod::FloquetDiag,
        omega_drive: omega,
        cutoff: Some(cutoff),
    })
}

/// The effective zero-harmonic Hamiltonian for `method`.
pub fn effective_floquet_hamiltonian<T: Real>(
    spec: &FloquetSpec<T>,
    method: EffectiveMethod,
    cutoff: usize,
) -> Result<CMatrix<T>> {
    match method {
        EffectiveMethod::SwFirst => {
            build_floquet(spec, cutoff)?;
            floquet_sw_hamiltonian(spec)
        }
        EffectiveMethod::Adiabatic => {
            let ph = floquet_partition(&build_floquet(spec, cutoff)?)?;
            Ok(adiabatic_hamiltonian(&ph))
        }
        EffectiveMethod::BlochOrder(k) => {
            let ph = floquet_partition(&build_floquet(spec, cutoff)?)?;
            let be = bloch_iterate(&ph, k)?;
            Ok(hermitian_from_b(&ph, be.b())?.0)
        }
    }
}

pub fn quasi_energies_effective<T: Real>(
    spec: &FloquetSpec<T>,
    method: EffectiveMethod,
    cutoff: usize,
) -> Result<QuasiEnergySet<T>> {
    let h = effective_floquet_hamiltonian(spec, method, cutoff)?;
    let omega = spec.omega_drive();
    Ok(QuasiEnergySet {
        values: folded_sorted(hermitian_eig(&h)?.real_values(), omega),
        method: QuasiEnergyMethod::Effective(method),
        omega_drive: omega,
        cutoff: Some(cutoff),
    })
}

/// Outcome of doubling the cutoff until the quasi-energies settle.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffConvergence<T: Real> {
    pub set: QuasiEnergySet<T>,
    /// Zone distance between the last two cutoffs.
    pub shift: T,
    /// Shifts after each doubling.
    pub history: Vec<(usize, T)>,
    pub converged: bool,
}

/// Evaluates `f` at `N = max(32, max harmonic)` and doubles `N` until the
/// largest quasi-energy change is below `1e-10` or `N` reaches 256.
pub fn converge_cutoff<T: Real>(
    spec: &FloquetSpec<T>,
    f: impl Fn(usize) -> Result<QuasiEnergySet<T>>,
) -> Result<CutoffConvergence<T>> {
    let omega = spec.omega_drive();
    let mut n = DEFAULT_CUTOFF.max(spec.max_harmonic());
    let mut prev = f(n)?;
    let mut history = Vec::new();
    let tol = T::tol(CUTOFF_SHIFT_TOL);
    loop {
        if n >= MAX_AUTO_CUTOFF {
            let shift = history.last().map_or(T::infinity(), |h: &(usize, T)| h.1);
            return Ok(CutoffConvergence {
                set: prev,
                shift,
                history,
                converged: shift < tol,
            });
        }
        n = (2 * n).min(MAX_AUTO_CUTOFF);
        let next = f(n)?;
        let shift = next
            .values
            .iter()
            .zip(prev.values.iter())
            .fold(T::zero(), |m, (&a, &b)| crate::matrixkit::rmax(m, zone_distance(a, b, omega)));
        history.push((n, shift));
        prev = next;
        if shift < tol {
            return Ok(CutoffConvergence {
                set: prev,
                shift,
                history,
                converged: true,
            });
        }
    }
}

//! Time evolution under full and effective generators, populations,
//! low-pass filtering and the secular shift of Rabi maxima.

use crate::error::{Error, Result};
use crate::floquet::{step_propagator, FloquetSpec, Integrator, STEP_UNITARITY_TOL};
use crate::matrixkit::{
    expm, hermitian_eig, inverse, is_hermitian, spectral_reassemble, unitarity_deviation,
    DEFAULT_HERMITIAN_TOL,
};
use crate::partition::PartitionedHamiltonian;
use crate::scalar::{c, CMatrix, CVector, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    pub amplitudes: CVector<T>,
    pub labels: Option<Vec<String>>,
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: CVector<T>) -> Result<Self> {
        if !amplitudes.iter().all(|z| z.re.is_finite_value() && z.im.is_finite_value()) {
            return Err(Error::NonFinite);
        }
        Ok(StateVector {
            amplitudes,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.amplitudes.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} labels", self.amplitudes.len()),
                found: format!("{} labels", labels.len()),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::IndexOutOfRange { index: i, dim });
        }
        let mut v = CVector::<T>::zeros(dim);
        v[i] = c(T::one(), T::zero());
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    FullHermitian,
    EffectiveNonHermitian,
    EffectiveHermitian,
}

#[derive(Debug, Clone)]
pub struct TimeSeries<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<CVector<T>>,
    pub labels: Option<Vec<String>>,
    pub generator_kind: GeneratorKind,
}

impl<T: Real> TimeSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.len())
    }

    pub fn norms(&self) -> Vec<T> {
        self.states.iter().map(|s| s.norm()).collect()
    }
}

/// `times[0] = 0`, strictly increasing, finite.
pub fn validate_times<T: Real>(times: &[T]) -> Result<()> {
    let Some(&first) = times.first() else {
        return Err(Error::InvalidTimes("empty time grid".into()));
    };
    if first != T::zero() {
        return Err(Error::InvalidTimes(format!("first time is {first}, expected 0")));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) || !w[1].is_finite_value() {
            return Err(Error::InvalidTimes(format!(
                "times must be strictly increasing and finite ({} then {})",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// `n` equally spaced samples on `[0, t_max]` (a single sample at 0 when
/// `t_max = 0` or `n = 1`).
pub fn uniform_times<T: Real>(t_max: T, samples: usize) -> Result<Vec<T>> {
    if !(t_max >= T::zero()) || !t_max.is_finite_value() {
        return Err(Error::InvalidTimes(format!("t_max must be nonnegative, got {t_max}")));
    }
    if samples == 0 {
        return Err(Error::InvalidTimes("at least one sample required".into()));
    }
    if t_max == T::zero() || samples == 1 {
        return Ok(vec![T::zero()]);
    }
    let dt = t_max / T::lit((samples - 1) as f64);
    Ok((0..samples).map(|i| T::lit(i as f64) * dt).collect())
}

fn check_state<T: Real>(h: &CMatrix<T>, psi0: &CVector<T>) -> Result<()> {
    crate::matrixkit::ensure_square(h)?;
    if h.nrows() != psi0.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}-vector", h.nrows()),
            found: format!("{}-vector", psi0.len()),
        });
    }
    Ok(())
}

/// `ψ(t) = e^{−iHt}ψ₀`. Hermitian `H` uses one eigendecomposition; anything
/// else uses a matrix exponential per time and no renormalization. Samples at
/// `t = 0` return `ψ₀` exactly.
pub fn evolve_constant<T: Real>(h: &CMatrix<T>, psi0: &StateVector<T>, times: &[T]) -> Result<TimeSeries<T>> {
    check_state(h, &psi0.amplitudes)?;
    validate_times(times)?;
    let hermitian = is_hermitian(h, T::tol(DEFAULT_HERMITIAN_TOL));
    let states = if hermitian {
        let eig = hermitian_eig(h)?;
        let coeffs = eig.vectors.adjoint() * &psi0.amplitudes;
        times
            .iter()
            .map(|&t| {
                if t == T::zero() {
                    return psi0.amplitudes.clone();
                }
                let phased = CVector::from_fn(coeffs.len(), |i, _| {
                    let a = -eig.values[i].re * t;
                    coeffs[i] * c(nalgebra::ComplexField::cos(a), nalgebra::ComplexField::sin(a))
                });
                &eig.vectors * phased
            })
            .collect()
    } else {
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if t == T::zero() {
                out.push(psi0.amplitudes.clone());
                continue;
            }
            let u = expm(&h.map(|z| z * c(T::zero(), -t)))?;
            out.push(u * &psi0.amplitudes);
        }
        out
    };
    Ok(TimeSeries {
        times: times.to_vec(),
        states,
        labels: psi0.labels.clone(),
        generator_kind: if hermitian {
            GeneratorKind::FullHermitian
        } else {
            GeneratorKind::EffectiveNonHermitian
        },
    })
}

/// Stepwise integration of `i∂ₜψ = H(t)ψ`. Each sampling interval is split
/// into equal steps so that a full period takes at least
/// `substeps_per_period` of them.
pub fn evolve_periodic<T: Real>(
    spec: &FloquetSpec<T>,
    psi0: &StateVector<T>,
    times: &[T],
    substeps_per_period: usize,
    integrator: Integrator,
) -> Result<TimeSeries<T>> {
    if psi0.dim() != spec.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}-vector", spec.dim()),
            found: format!("{}-vector", psi0.dim()),
        });
    }
    validate_times(times)?;
    let period = spec.period();
    let per = T::lit(substeps_per_period.max(1) as f64);
    let mut psi = psi0.amplitudes.clone();
    let mut states = vec![psi.clone()];
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let n = ((span / period * per).as_f64() - 1e-9).ceil().max(1.0) as usize;
        let dt = span / T::lit(n as f64);
        for s in 0..n {
            let u = step_propagator(spec, w[0] + T::lit(s as f64) * dt, dt, integrator)?;
            let dev = unitarity_deviation(&u);
            if dev > T::tol(STEP_UNITARITY_TOL) {
                return Err(Error::NonUnitaryStep {
                    deviation: dev.as_f64(),
                });
            }
            psi = u * psi;
        }
        states.push(psi.clone());
    }
    Ok(TimeSeries {
        times: times.to_vec(),
        states,
        labels: psi0.labels.clone(),
        generator_kind: GeneratorKind::FullHermitian,
    })
}

/// `|ψ_i(t)|²` for each requested component, rows indexed by time.
pub fn populations<T: Real>(ts: &TimeSeries<T>, components: &[usize]) -> Result<Vec<Vec<T>>> {
    let dim = ts.dim();
    if let Some(&bad) = components.iter().find(|&&i| i >= dim) {
        return Err(Error::IndexOutOfRange { index: bad, dim });
    }
    Ok(ts
        .states
        .iter()
        .map(|s| components.iter().map(|&i| s[i].norm_sqr()).collect())
        .collect())
}

/// One column of a time × component table.
pub fn column<T: Real>(table: &[Vec<T>], j: usize) -> Vec<T> {
    table.iter().map(|row| row[j]).collect()
}

/// Integral of the piecewise-linear interpolant of `x` from sample 0 to the
/// fractional position `pos` (grid units).
fn cumulative_at<T: Real>(x: &[T], cum: &[T], pos: T) -> T {
    let last = x.len() - 1;
    let i = pos.floor().as_f64().max(0.0) as usize;
    if i >= last {
        return cum[last];
    }
    let f = pos - T::lit(i as f64);
    let slope = x[i + 1] - x[i];
    cum[i] + f * x[i] + f * f * slope / T::lit(2.0)
}

/// Centered moving average of the piecewise-linear interpolant over a window
/// of width `window` on a uniform grid of spacing `dt`. Near the ends the
/// window shrinks symmetrically to stay inside the data.
pub fn low_pass_signal<T: Real>(x: &[T], window: T, dt: T) -> Result<Vec<T>> {
    if !(dt > T::zero()) || !(window >= dt) {
        return Err(Error::WindowTooSmall {
            window: window.as_f64(),
            dt: dt.as_f64(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Ok(x.to_vec());
    }
    let mut cum = vec![T::zero(); n];
    for i in 1..n {
        cum[i] = cum[i - 1] + (x[i] + x[i - 1]) / T::lit(2.0);
    }
    let half = window / dt / T::lit(2.0);
    let last = T::lit((n - 1) as f64);
    Ok((0..n)
        .map(|i| {
            let pos = T::lit(i as f64);
            let mut a = half;
            if pos < a {
                a = pos;
            }
            if last - pos < a {
                a = last - pos;
            }
            if a <= T::zero() {
                x[i]
            } else {
                (cumulative_at(x, &cum, pos + a) - cumulative_at(x, &cum, pos - a)) / (a + a)
            }
        })
        .collect())
}

/// [`low_pass_signal`] applied to each column of a time × component table.
pub fn low_pass<T: Real>(series: &[Vec<T>], window: T, dt: T) -> Result<Vec<Vec<T>>> {
    let cols = series.first().map_or(0, |r| r.len());
    let mut out = vec![vec![T::zero(); cols]; series.len()];
    for j in 0..cols {
        let filtered = low_pass_signal(&column(series, j), window, dt)?;
        for (row, v) in out.iter_mut().zip(filtered) {
            row[j] = v;
        }
    }
    Ok(out)
}

/// Uniform spacing of a time grid, checked to one part in 10⁶.
pub fn grid_spacing<T: Real>(times: &[T]) -> Result<T> {
    validate_times(times)?;
    if times.len() < 2 {
        return Err(Error::InvalidTimes("need at least two samples".into()));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if crate::matrixkit::rabs(w[1] - w[0] - dt) > dt * T::lit(1e-6) {
            return Err(Error::InvalidTimes("grid is not uniform".into()));
        }
    }
    Ok(dt)
}

/// `2π / ḡ`, with `ḡ` the mean distance between slow-attached and fast
/// eigenvalues of the full Hamiltonian; eigenvectors are classified by
/// their weight on the slow indices.
pub fn default_filter_window<T: Real>(ph: &PartitionedHamiltonian<T>) -> Result<T> {
    let h = ph.block_matrix();
    let eig = hermitian_eig(&h)?;
    let p = ph.slow_dim();
    let mut weighted: Vec<(T, T)> = eig
        .vectors
        .column_iter()
        .zip(eig.values.iter())
        .map(|(v, l)| (v.rows(0, p).norm_squared(), l.re))
        .collect();
    weighted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let (slow, fast) = weighted.split_at(p);
    let mut sum = T::zero();
    for s in slow {
        for f in fast {
            sum += crate::matrixkit::rabs(f.1 - s.1);
        }
    }
    let mean = sum / T::lit((slow.len() * fast.len()) as f64);
    Ok(T::two_pi() / mean)
}

/// Indices of samples whose centered window of width `window` lies inside
/// the grid, i.e. where [`low_pass_signal`] applies the full window.
pub fn full_window_indices<T: Real>(times: &[T], window: T) -> std::ops::Range<usize> {
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return 0..0;
    };
    let half = window / T::lit(2.0);
    let start = times.iter().position(|&t| t - first >= half).unwrap_or(times.len());
    let end = times.iter().rposition(|&t| last - t >= half).map_or(0, |i| i + 1);
    start..end.max(start)
}

/// One fast period, `2π/‖Δ‖`.
pub fn fast_period_window<T: Real>(ph: &PartitionedHamiltonian<T>) -> T {
    T::two_pi() / crate::matrixkit::spectral_norm(ph.delta())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecularShift<T: Real> {
    /// Mean of `t_reference − t_candidate` over paired maxima.
    pub mean: T,
    /// `(t_reference, t_candidate)` per paired maximum.
    pub peaks: Vec<(T, T)>,
}

impl<T: Real> SecularShift<T> {
    pub fn shifts(&self) -> Vec<T> {
        self.peaks.iter().map(|(r, c)| *r - *c).collect()
    }
}

/// Interior maxima with sub-grid refinement by a parabola through three points,
/// ignoring maxima within `margin` of either end.
pub fn interior_maxima<T: Real>(x: &[T], times: &[T], margin: T) -> Vec<T> {
    let n = x.len().min(times.len());
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    let lo = times[0] + margin;
    let hi = times[n - 1] - margin;
    for i in 1..n - 1 {
        if x[i] > x[i - 1] && x[i] >= x[i + 1] {
            let (ym, y0, yp) = (x[i - 1], x[i], x[i + 1]);
            let den = ym - y0 - y0 + yp;
            let offset = if den < T::zero() {
                (ym - yp) / (den + den)
            } else {
                T::zero()
            };
            let dt = if offset < T::zero() {
                times[i] - times[i - 1]
            } else {
                times[i + 1] - times[i]
            };
            let t = times[i] + offset * dt;
            if t >= lo && t <= hi {
                out.push(t);
            }
        }
    }
    out
}

/// Minimum number of interior maxima required by [`secular_shift`].
pub const MIN_PEAKS: usize = 3;

/// Mean timing offset of candidate maxima relative to reference maxima,
/// pairing by order of occurrence. Positive means the candidate peaks early.
///
/// Peak counts must agree, except that one unpaired trailing peak is
/// dropped; anything else is `InsufficientPeaks`.
pub fn secular_shift<T: Real>(
    reference: &[T],
    candidate: &[T],
    times: &[T],
    margin: T,
) -> Result<SecularShift<T>> {
    if reference.len() != times.len() || candidate.len() != times.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} samples", times.len()),
            found: format!("{} and {}", reference.len(), candidate.len()),
        });
    }
    let mut r = interior_maxima(reference, times, margin);
    let mut c = interior_maxima(candidate, times, margin);
    // A single trailing peak whose partner falls past the end of the data
    // is a truncation effect, not a mismatch.
    if r.len() == c.len() + 1 {
        r.pop();
    } else if c.len() == r.len() + 1 {
        c.pop();
    }
    if r.len() != c.len() || r.len() < MIN_PEAKS {
        return Err(Error::InsufficientPeaks {
            reference: r.len(),
            candidate: c.len(),
        });
    }
    let peaks: Vec<(T, T)> = r.into_iter().zip(c).collect();
    let mean = peaks.iter().fold(T::zero(), |s, (a, b)| s + (*a - *b)) / T::lit(peaks.len() as f64);
    Ok(SecularShift { mean, peaks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveGenerator {
    /// `ω + Ω†B`.
    NonHermitian,
    /// The hermitized sandwich.
    Hermitian,
}

/// How the full initial state enters the slow-sector evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dressing {
    /// `α(0)` is the slow part of `ψ₀` and populations are read from the
    /// evolved vector directly.
    #[default]
    Bare,
    /// `ψ₀` is projected orthogonally onto the graph `{(α, Bα)}`, giving
    /// `α_s = (1 + B†B)⁻¹(α₀ + B†γ₀)`. Hermitian evolution runs on `S_Bα_s`
    /// and populations are read from `S_B⁻¹α_h(t)`.
    Projected,
}

/// Slow amplitudes `α(t)` under an effective generator built from `b`.
///
/// `psi0` is in the original index order of `ph`.
pub fn evolve_effective<T: Real>(
    ph: &PartitionedHamiltonian<T>,
    b: &CMatrix<T>,
    psi0: &StateVector<T>,
    times: &[T],
    generator: EffectiveGenerator,
    dressing: Dressing,
) -> Result<TimeSeries<T>> {
    if psi0.dim() != ph.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}-vector", ph.dim()),
            found: format!("{}-vector", psi0.dim()),
        });
    }
    let p = ph.slow_dim();
    let block = ph.to_block_order(&psi0.amplitudes);
    let alpha0: CVector<T> = block.rows(0, p).into_owned();
    let gamma0: CVector<T> = block.rows(p, ph.fast_dim()).into_owned();
    let alpha_s = match dressing {
        Dressing::Bare => alpha0,
        Dressing::Projected => {
            let metric = CMatrix::<T>::identity(p, p) + b.adjoint() * b;
            inverse(&metric)? * (alpha0 + b.adjoint() * gamma0)
        }
    };
    let labels = psi0
        .labels
        .as_ref()
        .map(|l| ph.slow_indices().iter().map(|&i| l[i].clone()).collect());
    let mut ts = match generator {
        EffectiveGenerator::NonHermitian => {
            let h = crate::effective::nonhermitian_from_b(ph, b)?;
            let mut ts = evolve_constant(&h, &StateVector::new(alpha_s)?, times)?;
            ts.generator_kind = GeneratorKind::EffectiveNonHermitian;
            ts
        }
        EffectiveGenerator::Hermitian => {
            let (h, s_b) = crate::effective::hermitian_from_b(ph, b)?;
            match dressing {
                Dressing::Bare => evolve_constant(&h, &StateVector::new(alpha_s)?, times)?,
                Dressing::Projected => {
                    let s_inv = inverse(&s_b)?;
                    let mut ts = evolve_constant(&h, &StateVector::new(&s_b * alpha_s)?, times)?;
                    for s in ts.states.iter_mut() {
                        *s = &s_inv * &*s;
                    }
                    ts
                }
            }
        }
    };
    if generator == EffectiveGenerator::Hermitian {
        ts.generator_kind = GeneratorKind::EffectiveHermitian;
    }
    ts.labels = labels;
    Ok(ts)
}

/// `e^{−iHt}` for hermitian `H` by spectral reassembly (used in checks).
pub fn hermitian_propagator<T: Real>(h: &CMatrix<T>, t: T) -> Result<CMatrix<T>> {
    let eig = hermitian_eig(h)?;
    Ok(spectral_reassemble(&eig, |z| {
        let a = -z.re * t;
        c(nalgebra::ComplexField::cos(a), nalgebra::ComplexField::sin(a))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::monodromy;
    use crate::presets::{driven_qubit, sigma_x, sigma_z};
    use crate::scalar::cr;

    #[test]
    fn zero_hamiltonian_is_constant() {
        let psi = StateVector::<f64>::basis(2, 1).unwrap();
        let ts = evolve_constant(&CMatrix::zeros(2, 2), &psi, &[0.0, 1.0, 5.0]).unwrap();
        assert!(ts.states.iter().all(|s| s == &psi.amplitudes));
        assert_eq!(ts.generator_kind, GeneratorKind::FullHermitian);
    }

    #[test]
    fn diagonal_phase_flip() {
        let r = 0.5f64.sqrt();
        let psi = StateVector::new(CVector::from_vec(vec![cr(r), cr(r)])).unwrap();
        let h = sigma_z::<f64>().scale(0.5);
        let ts = evolve_constant(&h, &psi, &[0.0, std::f64::consts::PI]).unwrap();
        let s = &ts.states[1];
        // Relative phase e^{iπ} between the components.
        assert!((s[0] / s[1] + cr(1.0)).norm() < 1e-15);
        let pops = populations(&ts, &[0, 1]).unwrap();
        assert!(pops.iter().flatten().all(|&p| (p - 0.5).abs() < 1e-15));
        assert!(matches!(populations(&ts, &[2]), Err(Error::IndexOutOfRange { index: 2, dim: 2 })));
    }

    #[test]
    fn nonhermitian_uses_expm_and_keeps_drift() {
        let mut h = sigma_x::<f64>();
        h[(0, 1)] = cr(0.5);
        let psi = StateVector::<f64>::basis(2, 0).unwrap();
        let ts = evolve_constant(&h, &psi, &[0.0, 0.7, 1.3]).unwrap();
        assert_eq!(ts.generator_kind, GeneratorKind::EffectiveNonHermitian);
        let u = expm(&h.map(|z| z * c(0.0, -1.3))).unwrap();
        assert!((&ts.states[2] - u * &psi.amplitudes).norm() < 1e-15);
        assert!((ts.norms()[1] - 1.0).abs() > 1e-3);
    }

    #[test]
    fn time_validation() {
        let h = CMatrix::<f64>::zeros(2, 2);
        let psi = StateVector::basis(2, 0).unwrap();
        assert!(evolve_constant(&h, &psi, &[0.1, 0.2]).is_err());
        assert!(evolve_constant(&h, &psi, &[0.0, 0.2, 0.2]).is_err());
        assert_eq!(uniform_times(0.0f64, 10).unwrap(), vec![0.0]);
        assert_eq!(uniform_times(1.0f64, 3).unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn periodic_static_matches_constant() {
        let h0 = crate::scalar::from_real_rows::<f64>(&[&[0.3, 0.2], &[0.2, -0.4]]);
        let spec = FloquetSpec::static_hamiltonian(2.0, h0.clone()).unwrap();
        let psi = StateVector::basis(2, 0).unwrap();
        let times = uniform_times(5.0, 11).unwrap();
        let a = evolve_periodic(&spec, &psi, &times, 16, Integrator::Midpoint).unwrap();
        let b = evolve_constant(&h0, &psi, &times).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn stroboscopic_consistency() {
        let spec = driven_qubit::<f64>(10.0, 1.0, 0.0).unwrap();
        let period = spec.period();
        let steps = 64;
        let u = monodromy(&spec, steps, Integrator::Midpoint).unwrap();
        let psi = StateVector::basis(2, 0).unwrap();
        let times: Vec<f64> = (0..6).map(|n| n as f64 * period).collect();
        let ts = evolve_periodic(&spec, &psi, &times, steps, Integrator::Midpoint).unwrap();
        let mut v = psi.amplitudes.clone();
        for s in &ts.states {
            assert!((s - &v).norm() < 1e-9);
            v = &u * v;
        }
    }

    #[test]
    fn driven_qubit_closed_form_propagator() {
        // U(t) = e^{iωtσᶻ/2} e^{−i((ω+Δ)σᶻ/2 + gσˣ)t}.
        let (omega, g, det) = (10.0, 1.0, 0.5);
        let spec = driven_qubit::<f64>(omega, g, det).unwrap();
        let t = 0.83;
        let psi = StateVector::basis(2, 0).unwrap();
        let ts = evolve_periodic(&spec, &psi, &[0.0, t], 4096, Integrator::Magnus4).unwrap();
        let frame = hermitian_propagator(&sigma_z::<f64>().scale(omega / 2.0), -t).unwrap();
        let rot = sigma_z::<f64>().scale((omega + det) / 2.0) + sigma_x::<f64>().scale(g);
        let u = frame * hermitian_propagator(&rot, t).unwrap();
        assert!((&ts.states[1] - u * &psi.amplitudes).norm() < 1e-10);
    }

    #[test]
    fn midpoint_refinement_is_second_order() {
        let spec = driven_qubit::<f64>(10.0, 1.0, 0.3).unwrap();
        let psi = StateVector::basis(2, 0).unwrap();
        let times = uniform_times(3.0, 7).unwrap();
        let run = |n| {
            let ts = evolve_periodic(&spec, &psi, &times, n, Integrator::Midpoint).unwrap();
            populations(&ts, &[0, 1]).unwrap()
        };
        let (a, b, c) = (run(16), run(32), run(64));
        let diff = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| {
            x.iter().flatten().zip(y.iter().flatten()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
        };
        let (d1, d2) = (diff(&a, &b), diff(&b, &c));
        assert!(d2 <= d1 / 4.0 * 1.1, "{d1} {d2}");
    }

    #[test]
    fn low_pass_examples() {
        let flat = vec![vec![0.7f64]; 50];
        let f = low_pass(&flat, 1.0, 0.1).unwrap();
        assert!(f.iter().all(|r| (r[0] - 0.7).abs() < 1e-13));
        assert!(matches!(low_pass(&flat, 0.05, 0.1), Err(Error::WindowTooSmall { .. })));

        let dt = 0.01;
        let period = 0.5;
        let x: Vec<f64> = (0..2000).map(|i| (std::f64::consts::TAU * i as f64 * dt / period).cos()).collect();
        let y = low_pass_signal(&x, 2.0 * period, dt).unwrap();
        let interior = y[200..1800].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(interior < 0.1, "{interior}");
    }

    #[test]
    fn shift_examples() {
        let dt = 0.01;
        let times: Vec<f64> = (0..4000).map(|i| i as f64 * dt).collect();
        let f = |t: f64| (t * 1.3).sin().powi(2);
        let r: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let s = secular_shift(&r, &r, &times, 0.5).unwrap();
        assert_eq!(s.mean, 0.0);
        let late: Vec<f64> = times.iter().map(|&t| f(t - 0.5)).collect();
        let s = secular_shift(&r, &late, &times, 1.0).unwrap();
        assert!((s.mean + 0.5).abs() <= dt, "{}", s.mean);
        // Candidate early enough to fit one more maximum before the end.
        let early: Vec<f64> = times.iter().map(|&t| f(t + 0.8)).collect();
        let s = secular_shift(&r, &early, &times, 0.0).unwrap();
        assert!((s.mean - 0.8).abs() <= dt);
        assert_eq!(full_window_indices(&times[..11], 0.04), 2..9);
        let few: Vec<f64> = times.iter().map(|&t| (t * 0.1).sin()).collect();
        assert!(matches!(
            secular_shift(&few, &few, &times, 0.5),
            Err(Error::InsufficientPeaks { .. })
        ));
    }
}

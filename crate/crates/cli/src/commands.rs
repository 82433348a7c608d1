use effham::bloch::{
    adiabatic_embedding, bloch_iterate, iterate_bloch, perturbative_bloch, BlochEmbedding, IterationOptions,
};
use effham::dynamics::{
    default_filter_window, evolve_constant, evolve_effective, evolve_periodic, fast_period_window, grid_spacing,
    low_pass, populations, uniform_times, Dressing, EffectiveGenerator, StateVector, TimeSeries,
};
use effham::effective::{adiabatic_hamiltonian, hermitian_effective, match_spectra, second_order_hamiltonian};
use effham::floquet::{
    build_floquet, converge_cutoff, default_steps_per_period, floquet_partition, quasi_energies_effective,
    quasi_energies_floquet_diag, quasi_energies_monodromy, zone_distance, EffectiveMethod, FloquetSpec, Integrator,
    QuasiEnergySet, DEFAULT_CUTOFF,
};
use effham::matrixkit::{general_eigenvalues, hermitian_eig, spectral_norm, NormKind};
use effham::partition::{coupling_scales, PartitionedHamiltonian};
use effham::schriefferwolff::{pole_warning, sw_first_order_hamiltonian, sw_seed_embedding};
use effham::{ComplexMatrix, ComplexVector};
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{DressingArg, ExportArgs, FloquetArgs, IntegratorArg, Method, ModelArgs, SimulateArgs, SolveArgs};
use crate::error::{CliError, CliResult};
use crate::format::{emit, fmt_f64, to_json, Csv};
use crate::model::{matrix_to_json, preset, JsonMatrix, Model, ModelFile};

fn load(args: &ModelArgs) -> CliResult<ModelFile> {
    match (&args.model, &args.preset) {
        (Some(path), _) => ModelFile::load(path),
        (None, Some(name)) => preset(name),
        (None, None) => Err(CliError::Usage("one of --model or --preset is required".into())),
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn integrator(arg: IntegratorArg) -> Integrator {
    match arg {
        IntegratorArg::Midpoint => Integrator::Midpoint,
        IntegratorArg::Magnus4 => Integrator::Magnus4,
    }
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub model: String,
    pub method: String,
    pub slow_indices: Vec<usize>,
    pub steps: usize,
    pub effective_hamiltonian: JsonMatrix,
    pub spectrum: Vec<f64>,
    pub nonhermitian_hamiltonian: Option<JsonMatrix>,
    pub nonhermitian_spectrum: Option<Vec<[f64; 2]>>,
    pub bloch_residual: f64,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub radius: Option<f64>,
    pub inner_radius: Option<f64>,
    pub hypothesis_holds: bool,
    pub spectral_gap: f64,
    pub full_spectrum: Vec<f64>,
    /// Largest distance from an effective eigenvalue to its partner in the full spectrum.
    pub spectrum_match_error: f64,
}

pub fn solve_report(args: &SolveArgs) -> CliResult<SolveReport> {
    let file = load(&args.model)?;
    let (ph, full) = match file.build()? {
        Model::Static {
            hamiltonian, partition, ..
        } => (*partition, hamiltonian),
        Model::Periodic { spec, .. } => {
            let tfo = build_floquet(&spec, args.cutoff)?;
            (floquet_partition(&tfo)?, tfo.matrix)
        }
    };
    let scales = coupling_scales(&ph, NormKind::Spectral);
    eprintln!("{}", scales.diagnostic());

    let (label, be, h, nonhermitian): (String, BlochEmbedding<f64>, ComplexMatrix, Option<ComplexMatrix>) =
        match args.method {
            Method::Adiabatic => ("adiabatic".into(), adiabatic_embedding(&ph), adiabatic_hamiltonian(&ph), None),
            Method::Sw => {
                if let Some(w) = pole_warning(&ph) {
                    eprintln!("{w}");
                }
                ("sw".into(), sw_seed_embedding(&ph)?, sw_first_order_hamiltonian(&ph)?, None)
            }
            Method::Iterate | Method::Perturb => {
                let (label, be) = match (args.method, args.order) {
                    (Method::Perturb, order) => {
                        let k = order.unwrap_or(2);
                        (format!("perturb{k}"), perturbative_bloch(&ph, k)?)
                    }
                    (_, Some(k)) => (format!("iterate{k}"), bloch_iterate(&ph, k)?),
                    (_, None) => {
                        let opts = IterationOptions {
                            max_iter: args.max_iter,
                            tol: args.tol,
                            norm: NormKind::Spectral,
                        };
                        let be = iterate_bloch(&ph, opts)?;
                        if be.residual > args.tol {
                            eprintln!(
                                "warning: Bloch iteration stopped after {} steps with residual {:.3e}",
                                be.steps, be.residual
                            );
                        }
                        ("iterate".into(), be)
                    }
                };
                let eo = hermitian_effective(&ph, &be)?;
                (label, be, eo.h_hermitian, Some(eo.h_nonhermitian))
            }
        };

    let spectrum = sorted(hermitian_eig(&h)?.real_values());
    let full_spectrum = sorted(hermitian_eig(&full)?.real_values());
    let matched = match_spectra(&spectrum, &full_spectrum)?;
    let nonhermitian_spectrum = match &nonhermitian {
        Some(m) => {
            let mut z = general_eigenvalues(m)?;
            z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            Some(z.into_iter().map(|z| [z.re, z.im]).collect())
        }
        None => None,
    };
    if !scales.hypothesis_holds() {
        eprintln!("warning: contraction hypothesis fails; the effective Hamiltonian may be unreliable");
    }
    Ok(SolveReport {
        model: file.kind().into(),
        method: label,
        slow_indices: ph.slow_indices().to_vec(),
        steps: be.steps,
        effective_hamiltonian: matrix_to_json(&h),
        spectrum,
        nonhermitian_hamiltonian: nonhermitian.as_ref().map(matrix_to_json),
        nonhermitian_spectrum,
        bloch_residual: be.residual,
        epsilon: scales.epsilon,
        epsilon_prime: scales.epsilon_prime,
        radius: scales.radius,
        inner_radius: scales.inner_radius,
        hypothesis_holds: scales.hypothesis_holds(),
        spectral_gap: scales.spectral_gap,
        full_spectrum,
        spectrum_match_error: matched.max_error,
    })
}

pub fn solve(args: &SolveArgs) -> CliResult<()> {
    let report = solve_report(args)?;
    emit(&args.out, &to_json(&report))
}

/// Parses `1`, `-0.5`, `2i`, `-i`, `0.6+0.8i` and `1e-3-2e-3i`.
pub fn parse_complex(s: &str) -> Option<Complex<f64>> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| Complex::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().ok()?,
    };
    Some(Complex::new(re, im))
}

pub fn parse_state(s: &str, dim: usize) -> CliResult<ComplexVector> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != dim {
        return Err(CliError::Usage(format!("--psi0 has {} entries, model dimension is {dim}", parts.len())));
    }
    let values = parts
        .iter()
        .map(|p| parse_complex(p).ok_or_else(|| CliError::Usage(format!("cannot parse amplitude '{p}'"))))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ComplexVector::from_vec(values))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Generator {
    Exact,
    Adiabatic,
    Second,
    Sw,
    Iterate(usize, EffectiveGenerator),
    Perturb(usize, EffectiveGenerator),
}

fn parse_generator(name: &str) -> CliResult<Generator> {
    let bad = || CliError::Usage(format!("unknown generator '{name}'"));
    let order = |digits: &str| digits.parse::<usize>().map_err(|_| bad());
    let with_kind = |rest: &str| -> CliResult<(usize, EffectiveGenerator)> {
        if let Some(d) = rest.strip_suffix("_hermitized") {
            Ok((order(d)?, EffectiveGenerator::Hermitian))
        } else if let Some(d) = rest.strip_suffix("_nonhermitian") {
            Ok((order(d)?, EffectiveGenerator::NonHermitian))
        } else {
            Ok((order(rest)?, EffectiveGenerator::NonHermitian))
        }
    };
    match name {
        "exact" => Ok(Generator::Exact),
        "adiabatic" => Ok(Generator::Adiabatic),
        "second" => Ok(Generator::Second),
        "sw" => Ok(Generator::Sw),
        _ => {
            if let Some(rest) = name.strip_prefix("iterate") {
                let (k, g) = with_kind(rest)?;
                Ok(Generator::Iterate(k, g))
            } else if let Some(rest) = name.strip_prefix("perturb") {
                let (k, g) = with_kind(rest)?;
                Ok(Generator::Perturb(k, g))
            } else if let Some(rest) = name.strip_prefix("hermitized") {
                Ok(Generator::Perturb(order(rest)?, EffectiveGenerator::Hermitian))
            } else {
                Err(bad())
            }
        }
    }
}

/// Slow amplitudes of `psi0` evolved under a fixed slow-sector matrix.
fn evolve_slow(
    ph: &PartitionedHamiltonian<f64>,
    h: &ComplexMatrix,
    psi0: &StateVector<f64>,
    times: &[f64],
) -> CliResult<TimeSeries<f64>> {
    let block = ph.to_block_order(&psi0.amplitudes);
    let alpha = StateVector::new(block.rows(0, ph.slow_dim()).into_owned())?;
    Ok(evolve_constant(h, &alpha, times)?)
}

struct Run {
    name: String,
    labels: Vec<String>,
    series: TimeSeries<f64>,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let model = load(&args.model)?.build()?;
    let names: Vec<&str> = args.generators.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(CliError::Usage("--generators is empty".into()));
    }
    let generators = names.iter().map(|n| parse_generator(n)).collect::<CliResult<Vec<_>>>()?;
    let dressing = match args.dressing {
        DressingArg::Bare => Dressing::Bare,
        DressingArg::Projected => Dressing::Projected,
    };
    let (labels, dim) = match &model {
        Model::Static { labels, .. } | Model::Periodic { labels, .. } => (labels.clone(), labels.len()),
    };
    let psi0 = match &args.psi0 {
        Some(s) => StateVector::new(parse_state(s, dim)?)?,
        None => StateVector::basis(dim, 0)?,
    };
    if (psi0.norm() - 1.0).abs() > 1e-12 {
        eprintln!("warning: initial state has norm {:.6}", psi0.norm());
    }
    let psi0 = psi0.with_labels(labels.clone())?;

    let mut runs = Vec::new();
    let window;
    match &model {
        Model::Static {
            hamiltonian, partition, ..
        } => {
            let ph = partition;
            let scales = coupling_scales(ph, NormKind::Spectral);
            eprintln!("{}", scales.diagnostic());
            let times = uniform_times(args.tmax.unwrap_or(60.0 * fast_period_window(ph)), args.samples)?;
            window = match args.window {
                Some(w) => w,
                None => default_filter_window(ph)?,
            };
            let slow_labels: Vec<String> = ph.slow_indices().iter().map(|&i| labels[i].clone()).collect();
            for (name, g) in names.iter().zip(&generators) {
                let series = match g {
                    Generator::Exact => evolve_constant(hamiltonian, &psi0, &times)?,
                    Generator::Adiabatic => evolve_effective(
                        ph,
                        adiabatic_embedding(ph).b(),
                        &psi0,
                        &times,
                        EffectiveGenerator::NonHermitian,
                        dressing,
                    )?,
                    Generator::Second => evolve_slow(ph, &second_order_hamiltonian(ph), &psi0, &times)?,
                    Generator::Sw => {
                        if let Some(w) = pole_warning(ph) {
                            eprintln!("{w}");
                        }
                        evolve_slow(ph, &sw_first_order_hamiltonian(ph)?, &psi0, &times)?
                    }
                    Generator::Iterate(k, kind) => {
                        evolve_effective(ph, bloch_iterate(ph, *k)?.b(), &psi0, &times, *kind, dressing)?
                    }
                    Generator::Perturb(k, kind) => {
                        evolve_effective(ph, perturbative_bloch(ph, *k)?.b(), &psi0, &times, *kind, dressing)?
                    }
                };
                let labels = if *g == Generator::Exact {
                    labels.clone()
                } else {
                    slow_labels.clone()
                };
                runs.push(Run {
                    name: name.to_string(),
                    labels,
                    series,
                });
            }
        }
        Model::Periodic { spec, .. } => {
            if let Some(name) = names.iter().zip(&generators).find(|(_, g)| **g != Generator::Exact) {
                return Err(CliError::Usage(format!(
                    "generator '{}' needs a static model; periodic models support only exact",
                    name.0
                )));
            }
            let times = uniform_times(args.tmax.unwrap_or(20.0 * spec.period()), args.samples)?;
            window = args.window.unwrap_or(spec.period());
            let steps = args.steps.unwrap_or_else(|| default_steps_per_period(spec));
            let series = evolve_periodic(spec, &psi0, &times, steps, integrator(args.integrator))?;
            for name in &names {
                runs.push(Run {
                    name: name.to_string(),
                    labels: labels.clone(),
                    series: series.clone(),
                });
            }
        }
    }

    let tables = runs
        .iter()
        .map(|r| population_table(r, args.low_pass.then_some(window)))
        .collect::<CliResult<Vec<_>>>()?;
    if args.out == "-" {
        let mut header = vec!["generator".to_string(), "t".to_string()];
        header.extend(labels.iter().map(|l| format!("pop_{l}")));
        header.push("norm".into());
        let mut csv = Csv::new(&header);
        for (run, table) in runs.iter().zip(&tables) {
            for (t, pops, norm) in table {
                let mut cells = vec![run.name.clone(), fmt_f64(*t)];
                for l in &labels {
                    match run.labels.iter().position(|x| x == l) {
                        Some(j) => cells.push(fmt_f64(pops[j])),
                        None => cells.push(String::new()),
                    }
                }
                cells.push(fmt_f64(*norm));
                csv.row(&cells);
            }
        }
        emit("-", &csv.finish())
    } else {
        for (run, table) in runs.iter().zip(&tables) {
            let mut header = vec!["t".to_string()];
            header.extend(run.labels.iter().map(|l| format!("pop_{l}")));
            header.push("norm".into());
            let mut csv = Csv::new(&header);
            for (t, pops, norm) in table {
                let mut cells = vec![fmt_f64(*t)];
                cells.extend(pops.iter().map(|p| fmt_f64(*p)));
                cells.push(fmt_f64(*norm));
                csv.row(&cells);
            }
            emit(&format!("{}_{}.csv", args.out, run.name), &csv.finish())?;
        }
        Ok(())
    }
}

type Table = Vec<(f64, Vec<f64>, f64)>;

fn population_table(run: &Run, window: Option<f64>) -> CliResult<Table> {
    let ts = &run.series;
    let comps: Vec<usize> = (0..ts.dim()).collect();
    let mut pops = populations(ts, &comps)?;
    if let Some(w) = window {
        pops = low_pass(&pops, w, grid_spacing(&ts.times)?)?;
    }
    let norms = ts.norms();
    Ok(ts
        .times
        .iter()
        .zip(pops)
        .zip(norms)
        .map(|((t, p), n)| (*t, p, n))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepParam {
    Omega,
    Coupling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Sweep {
    param: SweepParam,
    lo: f64,
    hi: f64,
    points: usize,
}

fn parse_sweep(s: &str) -> CliResult<Sweep> {
    let bad = || CliError::Usage(format!("cannot parse sweep '{s}' (expected param:lo:hi:points)"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let param = match parts[0] {
        "omega" => SweepParam::Omega,
        "coupling" | "g" => SweepParam::Coupling,
        other => return Err(CliError::Usage(format!("unknown sweep parameter '{other}' (expected omega or coupling)"))),
    };
    let lo: f64 = parts[1].parse().map_err(|_| bad())?;
    let hi: f64 = parts[2].parse().map_err(|_| bad())?;
    let points: usize = parts[3].parse().map_err(|_| bad())?;
    if points == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    Ok(Sweep { param, lo, hi, points })
}

/// Largest spectral norm among the driving harmonics `k ≠ 0`.
pub fn drive_coupling(spec: &FloquetSpec<f64>) -> f64 {
    spec.components()
        .iter()
        .filter(|(k, _)| **k != 0)
        .map(|(_, h)| spectral_norm(h))
        .fold(0.0, f64::max)
}

fn with_coupling(spec: &FloquetSpec<f64>, g: f64) -> CliResult<FloquetSpec<f64>> {
    let g0 = drive_coupling(spec);
    if g0 == 0.0 {
        return Err(CliError::Usage("model has no driving harmonics to rescale".into()));
    }
    let comps = spec
        .components()
        .iter()
        .map(|(&k, h)| (k, if k == 0 { h.clone() } else { h * Complex::new(g / g0, 0.0) }))
        .collect();
    Ok(FloquetSpec::new(spec.omega_drive(), comps)?)
}

#[derive(Debug, Clone)]
pub struct QuasiEnergyRow {
    pub omega: f64,
    pub coupling: f64,
    pub monodromy: Vec<f64>,
    pub floquet_diag: Vec<f64>,
    pub effective: Vec<f64>,
    pub cutoff: usize,
    pub diag_vs_monodromy: f64,
    pub effective_vs_monodromy: f64,
}

/// Largest distance, modulo `ω`, from a reference value to the nearest candidate.
fn disagreement(reference: &[f64], candidate: &[f64], omega: f64) -> f64 {
    reference
        .iter()
        .map(|&a| candidate.iter().map(|&b| zone_distance(a, b, omega)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn converged(
    spec: &FloquetSpec<f64>,
    cutoff: Option<usize>,
    what: &str,
    f: impl Fn(usize) -> effham::Result<QuasiEnergySet<f64>>,
) -> CliResult<QuasiEnergySet<f64>> {
    match cutoff {
        Some(n) => Ok(f(n)?),
        None => {
            let c = converge_cutoff(spec, f)?;
            if !c.converged {
                eprintln!(
                    "warning: {what} quasi-energies not converged in the cutoff (last shift {:.3e})",
                    c.shift
                );
            }
            Ok(c.set)
        }
    }
}

pub fn quasi_energy_row(spec: &FloquetSpec<f64>, args: &FloquetArgs) -> CliResult<QuasiEnergyRow> {
    let method = match args.method {
        Method::Adiabatic => EffectiveMethod::Adiabatic,
        Method::Iterate => EffectiveMethod::BlochOrder(args.order),
        Method::Sw => EffectiveMethod::SwFirst,
        Method::Perturb => {
            return Err(CliError::Usage("floquet supports --method adiabatic, iterate or sw".into()));
        }
    };
    let omega = spec.omega_drive();
    let steps = args.steps.unwrap_or_else(|| default_steps_per_period(spec));
    let mono = quasi_energies_monodromy(spec, steps, integrator(args.integrator))?;
    let diag = converged(spec, args.cutoff, "Floquet-matrix", |n| quasi_energies_floquet_diag(spec, n))?;
    let eff = match method {
        EffectiveMethod::SwFirst => quasi_energies_effective(spec, method, args.cutoff.unwrap_or(DEFAULT_CUTOFF))?,
        _ => converged(spec, args.cutoff, "effective", |n| quasi_energies_effective(spec, method, n))?,
    };
    Ok(QuasiEnergyRow {
        omega,
        coupling: drive_coupling(spec),
        diag_vs_monodromy: disagreement(&mono.values, &diag.values, omega),
        effective_vs_monodromy: disagreement(&mono.values, &eff.values, omega),
        cutoff: diag.cutoff.unwrap_or(0),
        monodromy: mono.values,
        floquet_diag: diag.values,
        effective: eff.values,
    })
}

pub fn floquet_rows(args: &FloquetArgs) -> CliResult<Vec<QuasiEnergyRow>> {
    let spec = match load(&args.model)?.build()? {
        Model::Periodic { spec, .. } => spec,
        Model::Static { .. } => return Err(CliError::Usage("floquet needs a periodic model".into())),
    };
    let specs = match &args.sweep {
        None => vec![spec],
        Some(s) => {
            let sweep = parse_sweep(s)?;
            (0..sweep.points)
                .map(|i| {
                    let x = if sweep.points == 1 {
                        sweep.lo
                    } else {
                        sweep.lo + (sweep.hi - sweep.lo) * i as f64 / (sweep.points - 1) as f64
                    };
                    match sweep.param {
                        SweepParam::Omega => spec.with_omega(x).map_err(crate::model::model_error),
                        SweepParam::Coupling => with_coupling(&spec, x),
                    }
                })
                .collect::<CliResult<Vec<_>>>()?
        }
    };
    specs.par_iter().map(|s| quasi_energy_row(s, args)).collect()
}

pub fn floquet(args: &FloquetArgs) -> CliResult<()> {
    let rows = floquet_rows(args)?;
    let d = rows.first().map_or(0, |r| r.monodromy.len());
    let mut header = vec!["omega".to_string(), "coupling".to_string()];
    for prefix in ["monodromy", "floquet_diag", "effective"] {
        header.extend((0..d).map(|j| format!("{prefix}_{j}")));
    }
    header.extend(["cutoff", "diag_vs_monodromy", "effective_vs_monodromy"].map(String::from));
    let mut csv = Csv::new(&header);
    for r in &rows {
        let mut cells = vec![fmt_f64(r.omega), fmt_f64(r.coupling)];
        for v in [&r.monodromy, &r.floquet_diag, &r.effective] {
            cells.extend(v.iter().map(|x| fmt_f64(*x)));
        }
        cells.push(r.cutoff.to_string());
        cells.push(fmt_f64(r.diag_vs_monodromy));
        cells.push(fmt_f64(r.effective_vs_monodromy));
        csv.row(&cells);
    }
    emit(&args.out, &csv.finish())
}

pub fn export(args: &ExportArgs) -> CliResult<()> {
    let file = load(&args.model)?;
    // Validate before writing so a broken model is never re-emitted.
    file.build()?;
    let file = if args.as_matrix { file.expanded()? } else { file };
    emit(&args.out, &file.to_json())
}

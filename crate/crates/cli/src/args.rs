use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "effham", version, about = "Effective Hamiltonians by adiabatic elimination, Bloch iteration and Floquet analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute an effective Hamiltonian and write a JSON report.
    Solve(SolveArgs),
    /// Evolve an initial state under the full and effective generators.
    Simulate(SimulateArgs),
    /// Compare quasi-energies from the monodromy, the truncated Floquet
    /// operator and an effective Hamiltonian.
    Floquet(FloquetArgs),
    /// Write a model file.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// JSON model file.
    #[arg(long, conflicts_with = "preset")]
    pub model: Option<String>,
    /// Built-in model: lambda or driven-qubit.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Adiabatic,
    Iterate,
    Perturb,
    Sw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegratorArg {
    Midpoint,
    Magnus4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DressingArg {
    Bare,
    Projected,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "iterate")]
    pub method: Method,
    /// Perturbative order, or an exact number of Bloch iterations.
    #[arg(long)]
    pub order: Option<usize>,
    /// Residual tolerance of the Bloch iteration.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Maximum number of Bloch iterations when no order is given.
    #[arg(long, default_value_t = 64)]
    pub max_iter: usize,
    /// Harmonic cutoff for periodic models.
    #[arg(long, default_value_t = 32)]
    pub cutoff: usize,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Final time; defaults to 60 fast periods, or 20 drive periods.
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    /// Initial amplitudes, e.g. "1,0,0" or "0.6,0.8i,0".
    #[arg(long)]
    pub psi0: Option<String>,
    /// Comma-separated generators: exact, adiabatic, second, sw, iterateK,
    /// iterateK_nonhermitian, iterateK_hermitized, perturbK,
    /// perturbK_hermitized, hermitizedK.
    #[arg(long, default_value = "exact,adiabatic,iterate4")]
    pub generators: String,
    #[arg(long, value_enum, default_value = "bare")]
    pub dressing: DressingArg,
    /// Apply the moving-average filter to all populations.
    #[arg(long)]
    pub low_pass: bool,
    /// Filter window; defaults to the mean slow-fast period.
    #[arg(long)]
    pub window: Option<f64>,
    /// Integration steps per drive period for periodic models.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum, default_value = "midpoint")]
    pub integrator: IntegratorArg,
    /// `-` for a single table on stdout, otherwise a path prefix that gets
    /// `_<generator>.csv` appended.
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct FloquetArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Effective method: adiabatic, iterate or sw.
    #[arg(long, value_enum, default_value = "sw")]
    pub method: Method,
    /// Bloch iterations for the iterate method.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    /// Harmonic cutoff; doubled from 32 until converged when omitted.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Parameter sweep `param:lo:hi:points` with param omega or coupling (alias g).
    #[arg(long)]
    pub sweep: Option<String>,
    /// Monodromy steps per period.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum, default_value = "magnus4")]
    pub integrator: IntegratorArg,
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Write the Λ preset as an explicit matrix model.
    #[arg(long)]
    pub as_matrix: bool,
    #[arg(long, default_value = "-")]
    pub out: String,
}

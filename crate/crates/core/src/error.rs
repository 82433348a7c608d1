use thiserror::Error;

/// Failures reported by the numerical kernels and the model builders.
///
/// Payloads are carried as `f64` regardless of the scalar field so the error
/// type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("{routine} did not converge")]
    ConvergenceFailure { routine: &'static str },
    #[error("matrix is defective or nearly so (eigenvector condition number {condition:.3e})")]
    DefectiveMatrix { condition: f64 },
    #[error("matrix is singular to working precision (reciprocal condition {rcond:.3e})")]
    SingularMatrix { rcond: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("spectra overlap: eigenvalue {omega_eigenvalue} of the slow block and {delta_eigenvalue} of the fast block are {gap:.3e} apart")]
    SpectraOverlap {
        omega_eigenvalue: String,
        delta_eigenvalue: String,
        gap: f64,
    },
    #[error("partition leaves one sector empty")]
    EmptyPartition,
    #[error("invalid slow index set: {0}")]
    InvalidIndices(String),
    #[error("fast block is singular (reciprocal condition {rcond:.3e}){}", harmonic_hint(.harmonic))]
    SingularFastBlock { rcond: f64, harmonic: Option<i64> },
    #[error("Bloch iteration diverged at iteration {iteration} (residual {residual:.3e})")]
    Diverged { iteration: usize, residual: f64 },
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("Floquet cutoff {cutoff} is smaller than the largest harmonic {max_harmonic}")]
    CutoffTooSmall { cutoff: usize, max_harmonic: usize },
    #[error("invalid Floquet specification: {0}")]
    InvalidFloquetSpec(String),
    #[error("restricted-inverse series is diverging at order {order}")]
    SeriesDiverging { order: usize },
    #[error("monodromy matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitaryMonodromy { deviation: f64 },
    #[error("time step propagator is not unitary (deviation {deviation:.3e})")]
    NonUnitaryStep { deviation: f64 },
    #[error("component index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("filter window {window} is smaller than the grid spacing {dt}")]
    WindowTooSmall { window: f64, dt: f64 },
    #[error("insufficient or unmatched peaks (reference {reference}, candidate {candidate})")]
    InsufficientPeaks { reference: usize, candidate: usize },
    #[error("invalid time grid: {0}")]
    InvalidTimes(String),
}

fn harmonic_hint(harmonic: &Option<i64>) -> String {
    match harmonic {
        Some(m) => format!("; nearly resonant harmonic m = {m}"),
        None => String::new(),
    }
}

impl Error {
    /// Stable variant name, used by the command-line front end.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotSquare { .. } => "NotSquare",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::NonFinite => "NonFinite",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::DefectiveMatrix { .. } => "DefectiveMatrix",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::SpectraOverlap { .. } => "SpectraOverlap",
            Error::EmptyPartition => "EmptyPartition",
            Error::InvalidIndices(_) => "InvalidIndices",
            Error::SingularFastBlock { .. } => "SingularFastBlock",
            Error::Diverged { .. } => "Diverged",
            Error::ZeroVector => "ZeroVector",
            Error::CutoffTooSmall { .. } => "CutoffTooSmall",
            Error::InvalidFloquetSpec(_) => "InvalidFloquetSpec",
            Error::SeriesDiverging { .. } => "SeriesDiverging",
            Error::NonUnitaryMonodromy { .. } => "NonUnitaryMonodromy",
            Error::NonUnitaryStep { .. } => "NonUnitaryStep",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::WindowTooSmall { .. } => "WindowTooSmall",
            Error::InsufficientPeaks { .. } => "InsufficientPeaks",
            Error::InvalidTimes(_) => "InvalidTimes",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

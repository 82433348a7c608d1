//! Effective Hamiltonians for partitioned quantum systems.
//!
//! Given a hermitian `H` split into a slow sector (`ω`), a fast sector (`Δ`)
//! and their coupling (`Ω`), the crate computes slow-sector generators by
//! adiabatic elimination, by solving Bloch's equation `Ω + ΔB = Bω + BΩ†B`
//! iteratively or as a series, and by Schrieffer–Wolff rotations. The same
//! machinery applied to a truncated Floquet operator yields quasi-energies of
//! periodically driven systems.
//!
//! Everything is generic over the real scalar (`f64` or `f32`); the aliases
//! below fix `f64`.

// `!(a > b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod floquet;
pub mod matrixkit;
pub mod partition;
pub mod presets;
pub mod scalar;
pub mod schriefferwolff;

pub use error::{Error, Result};
pub use scalar::{CMatrix, CVector, Real};

pub type ComplexMatrix = CMatrix<f64>;
pub type ComplexVector = CVector<f64>;
pub type ComplexMatrixF32 = CMatrix<f32>;
pub type PartitionedHamiltonianF64 = partition::PartitionedHamiltonian<f64>;
pub type BlochEmbeddingF64 = bloch::BlochEmbedding<f64>;
pub type EffectiveOperatorF64 = effective::EffectiveOperator<f64>;
pub type SWGeneratorF64 = schriefferwolff::SWGenerator<f64>;
pub type FloquetSpecF64 = floquet::FloquetSpec<f64>;
pub type QuasiEnergySetF64 = floquet::QuasiEnergySet<f64>;

//! JSON model files.
//!
//! ```json
//! {"kind": "matrix", "hamiltonian": [[[re, im], ...], ...], "slow": [0, 1]}
//! {"kind": "lambda", "delta": -0.0175, "detuning": 1.0, "rabi_a": [0.4, 0.0], "rabi_b": [0.3, 0.0]}
//! {"kind": "floquet", "omega_drive": 10.0, "components": [{"k": -1, "matrix": ...}, ...]}
//! ```
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major nested arrays.

use effham::floquet::FloquetSpec;
use effham::matrixkit::hermitian_deviation;
use effham::partition::{partition_hamiltonian, PartitionedHamiltonian};
use effham::presets::{driven_qubit, lambda_system, LAMBDA_LABELS};
use effham::ComplexMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonComponent {
    pub k: i32,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelFile {
    Matrix {
        hamiltonian: JsonMatrix,
        slow: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Lambda {
        delta: f64,
        detuning: f64,
        rabi_a: [f64; 2],
        rabi_b: [f64; 2],
    },
    Floquet {
        omega_drive: f64,
        components: Vec<JsonComponent>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

/// The standard Λ parameters: δ = −0.0175, Δ = 1, Ω̃ = (0.4, 0.3).
pub fn lambda_preset() -> ModelFile {
    ModelFile::Lambda {
        delta: -0.0175,
        detuning: 1.0,
        rabi_a: [0.4, 0.0],
        rabi_b: [0.3, 0.0],
    }
}

/// Resonant driven qubit at `ω = 10`, `g = 1`.
pub fn driven_qubit_preset() -> ModelFile {
    let spec = driven_qubit::<f64>(10.0, 1.0, 0.0).expect("valid preset");
    floquet_to_file(&spec, Some(vec!["up".into(), "down".into()]))
}

pub fn preset(name: &str) -> CliResult<ModelFile> {
    match name {
        "lambda" => Ok(lambda_preset()),
        "driven-qubit" | "driven_qubit" => Ok(driven_qubit_preset()),
        other => Err(CliError::Usage(format!(
            "unknown preset '{other}' (expected lambda or driven-qubit)"
        ))),
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix, what: &str) -> CliResult<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(CliError::Model(format!("{what} must be a non-empty rectangular array")));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::Model(format!("{what} has non-finite entries")));
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| Complex::new(rows[i][j][0], rows[i][j][1])))
}

pub fn floquet_to_file(spec: &FloquetSpec<f64>, labels: Option<Vec<String>>) -> ModelFile {
    ModelFile::Floquet {
        omega_drive: spec.omega_drive(),
        components: spec
            .components()
            .iter()
            .map(|(&k, h)| JsonComponent {
                k,
                matrix: matrix_to_json(h),
            })
            .collect(),
        labels,
    }
}

/// A loaded and validated model.
#[derive(Debug, Clone)]
pub enum Model {
    Static {
        hamiltonian: ComplexMatrix,
        partition: Box<PartitionedHamiltonian<f64>>,
        labels: Vec<String>,
    },
    Periodic {
        spec: FloquetSpec<f64>,
        labels: Vec<String>,
    },
}

/// Malformed input is a model error; anything else met while building is numerical.
pub(crate) fn model_error(e: effham::Error) -> CliError {
    use effham::Error as E;
    match e {
        E::NotHermitian { .. }
        | E::NotSquare { .. }
        | E::ShapeMismatch { .. }
        | E::NonFinite
        | E::EmptyPartition
        | E::InvalidIndices(_)
        | E::InvalidFloquetSpec(_) => CliError::Model(format!("{}: {}", e.name(), e)),
        other => CliError::Numerical { source: other },
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i}")).collect()
}

fn check_labels(labels: Option<&Vec<String>>, n: usize) -> CliResult<Vec<String>> {
    match labels {
        Some(l) if l.len() != n => Err(CliError::Model(format!("{} labels for dimension {n}", l.len()))),
        Some(l) => Ok(l.clone()),
        None => Ok(default_labels(n)),
    }
}

impl ModelFile {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelFile::Matrix { .. } => "matrix",
            ModelFile::Lambda { .. } => "lambda",
            ModelFile::Floquet { .. } => "floquet",
        }
    }

    pub fn load(path: &str) -> CliResult<ModelFile> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.into(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<ModelFile> {
        serde_json::from_str(text).map_err(|e| CliError::Model(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        crate::format::to_json(self)
    }

    /// The Λ preset written out as an explicit matrix; other kinds unchanged.
    pub fn expanded(&self) -> CliResult<ModelFile> {
        match self.build()? {
            Model::Static {
                hamiltonian,
                partition,
                labels,
            } => Ok(ModelFile::Matrix {
                hamiltonian: matrix_to_json(&hamiltonian),
                slow: partition.slow_indices().to_vec(),
                labels: Some(labels),
            }),
            Model::Periodic { .. } => Ok(self.clone()),
        }
    }

    pub fn build(&self) -> CliResult<Model> {
        match self {
            ModelFile::Matrix {
                hamiltonian,
                slow,
                labels,
            } => {
                let h = matrix_from_json(hamiltonian, "hamiltonian")?;
                let partition = partition_hamiltonian(&h, slow).map_err(model_error)?;
                let labels = check_labels(labels.as_ref(), h.nrows())?;
                Ok(Model::Static {
                    hamiltonian: h,
                    partition: Box::new(partition),
                    labels,
                })
            }
            ModelFile::Lambda {
                delta,
                detuning,
                rabi_a,
                rabi_b,
            } => {
                let values = [*delta, *detuning, rabi_a[0], rabi_a[1], rabi_b[0], rabi_b[1]];
                if values.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::Model("lambda parameters must be finite".into()));
                }
                let h = lambda_system::<f64>(*delta, *detuning, (rabi_a[0], rabi_a[1]), (rabi_b[0], rabi_b[1]));
                let partition = partition_hamiltonian(&h, &[0, 1]).map_err(model_error)?;
                Ok(Model::Static {
                    hamiltonian: h,
                    partition: Box::new(partition),
                    labels: LAMBDA_LABELS.iter().map(|s| s.to_string()).collect(),
                })
            }
            ModelFile::Floquet {
                omega_drive,
                components,
                labels,
            } => {
                let mut comps = Vec::with_capacity(components.len());
                for c in components {
                    let m = matrix_from_json(&c.matrix, &format!("component {}", c.k))?;
                    if c.k == 0 && hermitian_deviation(&m) > 1e-12 * m.norm() {
                        return Err(CliError::Model("component 0 is not hermitian".into()));
                    }
                    comps.push((c.k, m));
                }
                let spec = FloquetSpec::new(*omega_drive, comps).map_err(model_error)?;
                let labels = check_labels(labels.as_ref(), spec.dim())?;
                Ok(Model::Periodic { spec, labels })
            }
        }
    }
}

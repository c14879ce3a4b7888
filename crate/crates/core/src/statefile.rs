//! JSON file formats for states and operator dumps.
//!
//! Matrices are stored row-major as `[re, im]` pairs.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bases::OperatorBasis;
use crate::error::{Error, Result};
use crate::json::f17_pairs;
use crate::operator::HermitianOp;
use crate::tomography::{DensityMatrix, FieldKind};

fn entries_of(m: &DMatrix<Complex64>) -> Vec<[f64; 2]> {
    let n = m.nrows();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
        .collect()
}

fn matrix_of(dim: usize, entries: &[[f64; 2]]) -> Result<DMatrix<Complex64>> {
    if entries.len() != dim * dim {
        return Err(Error::Malformed(format!(
            "expected {} entries for dimension {dim}, found {}",
            dim * dim,
            entries.len()
        )));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = entries[i * dim + j];
        Complex64::new(re, im)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub field: FieldKind,
    #[serde(serialize_with = "f17_pairs")]
    pub entries: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        StateFile {
            dim: rho.dim(),
            field: rho.field(),
            entries: entries_of(rho.op().matrix()),
        }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let op = HermitianOp::new(matrix_of(self.dim, &self.entries)?)?;
        DensityMatrix::new(op, self.field)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state files serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("state file: {e}")))
    }
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    std::fs::write(path, StateFile::from_state(rho).to_json())
        .map_err(|e| Error::Malformed(format!("writing {}: {e}", path.display())))
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Malformed(format!("reading {}: {e}", path.display())))?;
    StateFile::from_json(&text)?.to_state()
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorRecord {
    pub label: String,
    pub dim: usize,
    #[serde(serialize_with = "f17_pairs")]
    pub entries: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisDump {
    pub kind: crate::bases::BasisKind,
    pub site_dims: Vec<usize>,
    pub dim: usize,
    pub operators: Vec<OperatorRecord>,
}

impl BasisDump {
    pub fn new(basis: &OperatorBasis) -> Self {
        BasisDump {
            kind: basis.kind(),
            site_dims: basis.site_dims().to_vec(),
            dim: basis.dim(),
            operators: basis
                .iter()
                .map(|(label, op)| OperatorRecord {
                    label: label.to_string(),
                    dim: op.dim(),
                    entries: entries_of(op.matrix()),
                })
                .collect(),
        }
    }
}

/// Reads the operators back from a dump, for consumers of the format.
pub fn parse_basis_dump(text: &str) -> Result<Vec<(String, HermitianOp)>> {
    #[derive(Deserialize)]
    struct Record {
        label: String,
        dim: usize,
        entries: Vec<[f64; 2]>,
    }
    #[derive(Deserialize)]
    struct Dump {
        operators: Vec<Record>,
    }
    let dump: Dump = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("basis dump: {e}")))?;
    dump.operators
        .into_iter()
        .map(|r| Ok((r.label, HermitianOp::new(matrix_of(r.dim, &r.entries)?)?)))
        .collect()
}

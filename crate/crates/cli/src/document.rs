//! File formats: one JSON object per file, dense row-major matrices.

use std::path::Path;

use nalgebra::DVector;
use psdpencil::{GtrsInstance, SymMatrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `{n, A, B}`. Instance documents are accepted too; their vector data is
/// ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDocument {
    pub n: usize,
    #[serde(rename = "A")]
    pub a_mat: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b_mat: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

/// `{n, A, B, a, b, c}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub n: usize,
    #[serde(rename = "A")]
    pub a_mat: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b_mat: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

/// Planted solution written by `gen` next to the instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    pub kind: String,
    pub seed: u64,
}

/// Candidate `(x, μ)` for `verify`; a reference document qualifies when it
/// carries both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub x: Vec<f64>,
    pub mu: f64,
    #[serde(default)]
    pub objective: Option<f64>,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

pub fn write<T: Serialize>(path: &Path, doc: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).expect("serializable");
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::parse(format!("cannot write {}: {e}", path.display())))
}

fn square(name: &str, rows: &[Vec<f64>], n: usize) -> Result<SymMatrix, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::invariant(format!("{name} is not {n}x{n}")));
    }
    SymMatrix::from_rows(rows).map_err(|e| CliError::invariant(format!("{name}: {e}")))
}

fn vector(name: &str, v: &[f64], n: usize) -> Result<DVector<f64>, CliError> {
    if v.len() != n {
        return Err(CliError::invariant(format!(
            "{name} has {} entries, expected {n}",
            v.len()
        )));
    }
    Ok(DVector::from_column_slice(v))
}

impl PairDocument {
    pub fn matrices(&self) -> Result<(SymMatrix, SymMatrix), CliError> {
        if self.n == 0 {
            return Err(CliError::invariant("n must be at least 1"));
        }
        Ok((
            square("A", &self.a_mat, self.n)?,
            square("B", &self.b_mat, self.n)?,
        ))
    }
}

impl InstanceDocument {
    pub fn instance(&self) -> Result<GtrsInstance, CliError> {
        let n = self.n;
        if n == 0 {
            return Err(CliError::invariant("n must be at least 1"));
        }
        Ok(GtrsInstance::new(
            square("A", &self.a_mat, n)?,
            square("B", &self.b_mat, n)?,
            vector("a", &self.a, n)?,
            vector("b", &self.b, n)?,
            self.c,
        )?)
    }

    pub fn from_instance(inst: &GtrsInstance) -> Self {
        Self {
            n: inst.dim(),
            a_mat: inst.a_mat.to_rows(),
            b_mat: inst.b_mat.to_rows(),
            a: inst.a.iter().copied().collect(),
            b: inst.b.iter().copied().collect(),
            c: inst.c,
        }
    }
}

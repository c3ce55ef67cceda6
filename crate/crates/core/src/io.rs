use crate::attack::Witness;
use crate::error::Result;
use crate::gate::CanonicalForm;
use crate::matrix::CMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

/// On-disk matrix format: `rows`, `cols`, and row-major `data` as `[re, im]`
/// pairs at the top level, plus optional bookkeeping fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(flatten)]
    pub matrix: CMatrix,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl MatrixFile {
    pub fn bare(matrix: CMatrix) -> Self {
        MatrixFile {
            matrix,
            name: None,
            seed: None,
        }
    }
}

/// Decomposition output: the input matrix under `a` together with the
/// canonical data (`mu`, `p`, `q`, `c`, `u`), so a verifier can reassemble
/// and compare without recomputing the decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub a: CMatrix,
    #[serde(flatten)]
    pub form: CanonicalForm,
}

/// Anything the `verify` entry point understands, distinguished by shape.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum VerifyFile {
    Witness(Box<Witness>),
    Decomposition(Box<DecompositionFile>),
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(fs::write(path, text)?)
}

pub fn load_matrix(path: &Path) -> Result<MatrixFile> {
    load_json(path)
}

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Component, Mixture};
use crate::error::{Error, Result};

/// On-disk model record: `{ "dim": D, "weights": [...], "components": [{ "mean": [...], "cov": [[...]] }] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    pub weights: Vec<f64>,
    pub components: Vec<ComponentRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentRecord {
    pub mean: Vec<f64>,
    /// Row-major `dim x dim`.
    pub cov: Vec<Vec<f64>>,
}

/// Checks a parsed model record and builds the validated mixture.
pub fn validate_mixture(raw: &ModelFile) -> Result<Mixture> {
    let d = raw.dim;
    if d == 0 {
        return Err(Error::InvalidArgument("dim must be positive".into()));
    }
    if raw.weights.len() != raw.components.len() {
        return Err(Error::DimensionMismatch {
            expected: raw.components.len(),
            found: raw.weights.len(),
            context: "number of weights vs number of components",
        });
    }
    let mut comps = Vec::with_capacity(raw.components.len());
    for (i, rec) in raw.components.iter().enumerate() {
        if rec.mean.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rec.mean.len(),
                context: "mean length vs dim",
            });
        }
        if rec.cov.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rec.cov.len(),
                context: "covariance rows vs dim",
            });
        }
        if let Some(row) = rec.cov.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: row.len(),
                context: "covariance row length vs dim",
            });
        }
        let cov = DMatrix::from_row_iterator(d, d, rec.cov.iter().flatten().copied());
        comps.push(Component::new(DVector::from_column_slice(&rec.mean), cov, i)?);
    }
    Mixture::new(comps, raw.weights.clone())
}

/// Reads and validates a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<Mixture> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: ModelFile = serde_json::from_str(&text)?;
    validate_mixture(&raw)
}

impl Mixture {
    pub fn to_model_file(&self) -> ModelFile {
        let d = self.dim();
        ModelFile {
            dim: d,
            weights: self.weights().to_vec(),
            components: self
                .components()
                .iter()
                .map(|c| ComponentRecord {
                    mean: c.mean().iter().copied().collect(),
                    cov: (0..d).map(|r| c.cov().row(r).iter().copied().collect()).collect(),
                })
                .collect(),
        }
    }
}

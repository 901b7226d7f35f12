//! Versioned JSON model persistence.
//!
//! Reals are serialized in shortest-round-trip decimal form, so save and load
//! reproduce memories bit-exactly. Provenance records what produced the
//! model; timestamps are deliberately excluded so identical runs write
//! identical files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{Dataset, DynamicsConfig, PrototypeSet, Standardization};
use crate::trainer::{MaskSpec, TrainConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything a run needs to be reproduced or reused for inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskSpec>,
    #[serde(default)]
    pub standardized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standardization: Option<Standardization>,
}

/// On-disk model: memories, optional weights, and the dynamics they were
/// trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub k: usize,
    pub d: usize,
    pub memories: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub provenance: Provenance,
}

impl ModelFile {
    pub fn new(protos: &PrototypeSet, dynamics: DynamicsConfig, provenance: Provenance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            k: protos.k(),
            d: protos.dim(),
            memories: (0..protos.k()).map(|mu| protos.memory(mu).to_vec()).collect(),
            weights: protos.weights().map(|w| w.to_vec()),
            dynamics,
            provenance,
        }
    }

    pub fn prototype_set(&self) -> Result<PrototypeSet> {
        PrototypeSet::with_weights(Matrix::from_rows(&self.memories)?, self.weights.clone())
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ModelFile = serde_json::from_str(&text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                expected: SCHEMA_VERSION,
                got: file.schema_version,
            });
        }
        if file.memories.len() != file.k || file.memories.iter().any(|r| r.len() != file.d) {
            return Err(Error::DimensionMismatch {
                expected: file.k * file.d,
                got: file.memories.iter().map(|r| r.len()).sum(),
                context: "model file memory shape",
            });
        }
        Ok(file)
    }
}

/// Hex SHA-256 over the dataset's points and labels, for provenance.
pub fn dataset_hash(data: &Dataset) -> String {
    let mut hasher = Sha256::new();
    for v in data.points.as_slice() {
        hasher.update(v.to_le_bytes());
    }
    if let Some(labels) = &data.labels {
        for &l in labels {
            hasher.update((l as u64).to_le_bytes());
        }
    }
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

//! Self-describing model checkpoints.
//!
//! A checkpoint is a JSON document holding the network shape, the action
//! set it was trained with, provenance metadata and the flat parameter
//! vector. Floats are written with round-trip precision, so a reload is
//! bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};
use slicer_core::nn::{MlpArchitecture, PolicyModel};

use crate::artifacts::{read_json, to_json_bytes, write_atomic};
use crate::{HarnessError, Result};

pub const CHECKPOINT_FORMAT: &str = "slicer-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchRecord {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    /// Hidden-layer activation; the output layer is linear.
    pub activation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub algorithm: String,
    pub steps: u64,
    /// SHA-256 of the full scenario config.
    pub config_hash: String,
    /// SHA-256 of the reward block alone.
    pub reward_hash: String,
    pub actions: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub schema_version: u32,
    pub arch: ArchRecord,
    pub metadata: CheckpointMeta,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn new(model: &PolicyModel, metadata: CheckpointMeta) -> Self {
        let a = model.arch();
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            schema_version: CHECKPOINT_VERSION,
            arch: ArchRecord {
                input_dim: a.input_dim,
                hidden: a.hidden.clone(),
                output_dim: a.output_dim,
                activation: "relu".to_string(),
            },
            metadata,
            params: model.params().to_vec(),
        }
    }

    /// Rebuild the network, checking the header and parameter count.
    pub fn model(&self) -> Result<PolicyModel> {
        if self.format != CHECKPOINT_FORMAT || self.schema_version != CHECKPOINT_VERSION {
            return Err(HarnessError::Checkpoint(format!(
                "unsupported format {} v{}",
                self.format, self.schema_version
            )));
        }
        if self.arch.activation != "relu" {
            return Err(HarnessError::Checkpoint(format!(
                "unsupported activation {}",
                self.arch.activation
            )));
        }
        if self.metadata.actions.len() != self.arch.output_dim {
            return Err(HarnessError::Checkpoint(format!(
                "{} actions for {} outputs",
                self.metadata.actions.len(),
                self.arch.output_dim
            )));
        }
        let arch = MlpArchitecture::new(
            self.arch.input_dim,
            self.arch.hidden.clone(),
            self.arch.output_dim,
        )?;
        Ok(PolicyModel::from_params(arch, self.params.clone())?)
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    write_atomic(path, &to_json_bytes(ckpt)?)
}

pub fn load_checkpoint(path: &Path) -> Result<(Checkpoint, PolicyModel)> {
    let ckpt: Checkpoint = read_json(path)?;
    let model = ckpt.model()?;
    Ok((ckpt, model))
}

//! Versioned JSON checkpoints (`.ckpt.json`).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ArchKind, ModelConfig};
use super::network::{build_model, Model};
use crate::error::{Error, Result};
use crate::numeric::Matrix;

pub const CHECKPOINT_FORMAT: &str = "senti-risk-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    version: u32,
    arch: ArchKind,
    config: ModelConfig,
    tensors: BTreeMap<String, Matrix>,
}

#[derive(Deserialize)]
struct Header {
    format: Option<String>,
    version: Option<serde_json::Value>,
}

pub fn checkpoint_to_string(model: &Model) -> Result<String> {
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        arch: model.arch,
        config: model.config.clone(),
        tensors: model
            .params
            .tensors()
            .into_iter()
            .map(|(name, m)| (name, m.clone()))
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    Ok(text)
}

/// Parses a checkpoint, rejecting unknown versions, missing or extra tensors,
/// and shape mismatches by name.
pub fn checkpoint_from_str(text: &str) -> Result<Model> {
    let bad = |msg: String| Error::Checkpoint(msg);
    let header: Header = serde_json::from_str(text).map_err(|e| bad(format!("not a checkpoint: {e}")))?;
    if header.format.as_deref() != Some(CHECKPOINT_FORMAT) {
        return Err(bad(format!("format must be {CHECKPOINT_FORMAT:?}")));
    }
    match header.version {
        Some(serde_json::Value::Number(n)) if n.as_u64() == Some(u64::from(CHECKPOINT_VERSION)) => {}
        Some(v) => {
            return Err(bad(format!(
                "unsupported version {v}; this build reads version {CHECKPOINT_VERSION}"
            )))
        }
        None => return Err(bad("missing version".into())),
    }
    let file: CheckpointFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    file.config.validate().map_err(|e| bad(format!("config: {e}")))?;

    let mut model = build_model(&file.config, file.arch)?;
    let mut tensors = file.tensors;
    let expected: Vec<(String, (usize, usize))> = model
        .params
        .tensors()
        .into_iter()
        .map(|(n, m)| (n, m.shape()))
        .collect();
    for ((name, shape), slot) in expected.iter().zip(model.params.tensors_mut()) {
        let loaded = tensors
            .remove(name)
            .ok_or_else(|| bad(format!("missing tensor {name:?}")))?;
        if loaded.shape() != *shape {
            return Err(bad(format!(
                "tensor {name:?} is {}x{}, expected {}x{}",
                loaded.rows(),
                loaded.cols(),
                shape.0,
                shape.1
            )));
        }
        *slot = loaded;
    }
    if let Some(extra) = tensors.keys().next() {
        return Err(bad(format!("unexpected tensor {extra:?} for arch {}", file.arch)));
    }
    if model.params.embedding.table.row(0).iter().any(|&v| v != 0.0) {
        return Err(bad("embedding pad row must be zero".into()));
    }
    Ok(model)
}

pub fn save_checkpoint(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, checkpoint_to_string(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_str(&text)
}

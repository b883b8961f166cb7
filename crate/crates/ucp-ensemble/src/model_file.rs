//! Versioned JSON documents holding a trained ensemble.
//!
//! Floats are written with round-trip precision, so a loaded ensemble
//! predicts bit-for-bit what the trained one did.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use ucp_ensemble_core::TrainedEnsemble;

use crate::error::{AppError, AppResult};

pub const FORMAT: &str = "ucp-ensemble/model";
pub const VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    version: u64,
    ensemble: TrainedEnsemble,
}

pub fn save_ensemble<W: Write>(ensemble: &TrainedEnsemble, mut sink: W) -> AppResult<()> {
    let doc = Document { format: FORMAT.into(), version: VERSION, ensemble: ensemble.clone() };
    serde_json::to_writer_pretty(&mut sink, &doc)?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn load_ensemble<R: Read>(source: R) -> AppResult<TrainedEnsemble> {
    let value: Value =
        serde_json::from_reader(source).map_err(|e| AppError::ModelFile(format!("not valid JSON: {e}")))?;
    match value.get("format").and_then(Value::as_str) {
        Some(FORMAT) => {}
        Some(other) => return Err(AppError::ModelFile(format!("unexpected format `{other}`"))),
        None => return Err(AppError::ModelFile("missing `format` field".into())),
    }
    match value.get("version").and_then(Value::as_u64) {
        Some(VERSION) => {}
        Some(v) => return Err(AppError::ModelFile(format!("version {v} is not supported (expected {VERSION})"))),
        None => return Err(AppError::ModelFile("missing `version` field".into())),
    }
    let doc: Document = serde_json::from_value(value).map_err(|e| AppError::ModelFile(format!("corrupt: {e}")))?;
    if doc.ensemble.models.len() != ucp_ensemble_core::models::MODEL_COUNT {
        return Err(AppError::ModelFile(format!("expected 7 models, found {}", doc.ensemble.models.len())));
    }
    for (model, id) in doc.ensemble.models.iter().zip(ucp_ensemble_core::ModelId::ALL) {
        if model.id() != id {
            return Err(AppError::ModelFile(format!("model slot {id} holds {}", model.id())));
        }
    }
    Ok(doc.ensemble)
}

//! On-disk format for trained models.
//!
//! A model file is one JSON object carrying a format tag, the fitted
//! preprocessing chain, and the model parameters. The tag is checked on
//! load so an old or foreign file fails with a clear message instead of a
//! confusing field error.

use std::path::Path;

use serde::{Deserialize, Serialize};

use helixq_core::models::VariationalModel;
use helixq_core::pegasos::PegasosModel;
use helixq_core::pipeline::Preprocessor;
use helixq_core::qsvc::SvmModel;
use helixq_core::variational::TrainingTrace;
use helixq_core::{Error, Result};

pub const MODEL_FORMAT: &str = "helixq-model-v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "lowercase")]
pub enum ModelPayload {
    Qsvc(SvmModel),
    Pegasos(PegasosModel),
    Vqc(VariationalModel),
    Qnn(VariationalModel),
}

impl ModelPayload {
    pub fn name(&self) -> &'static str {
        match self {
            ModelPayload::Qsvc(_) => "qsvc",
            ModelPayload::Pegasos(_) => "pegasos",
            ModelPayload::Vqc(_) => "vqc",
            ModelPayload::Qnn(_) => "qnn",
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<u8> {
        match self {
            ModelPayload::Qsvc(m) => m.predict(row),
            ModelPayload::Pegasos(m) => m.predict(row),
            ModelPayload::Vqc(m) | ModelPayload::Qnn(m) => m.predict(row),
        }
    }

    /// Class-1 score: decision value for the margin models, probability
    /// scale for the variational ones. Larger always means more class 1.
    pub fn score(&self, row: &[f64]) -> Result<f64> {
        match self {
            ModelPayload::Qsvc(m) => m.decision_for(row),
            ModelPayload::Pegasos(m) => m.decision_for(row),
            ModelPayload::Vqc(m) | ModelPayload::Qnn(m) => m.score(row),
        }
    }

    pub fn trace(&self) -> Option<&TrainingTrace> {
        match self {
            ModelPayload::Vqc(m) | ModelPayload::Qnn(m) => Some(&m.trace),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedBundle {
    pub format: String,
    pub preprocessor: Preprocessor,
    pub model: ModelPayload,
}

impl TrainedBundle {
    pub fn new(preprocessor: Preprocessor, model: ModelPayload) -> Self {
        TrainedBundle { format: MODEL_FORMAT.to_string(), preprocessor, model }
    }
}

pub fn save_bundle(path: &Path, bundle: &TrainedBundle) -> Result<()> {
    let mut text = serde_json::to_string_pretty(bundle)
        .map_err(|e| Error::Format(format!("cannot serialize model: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_bundle(path: &Path) -> Result<TrainedBundle> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read model file {}: {e}", path.display())))?;
    let bundle: TrainedBundle = serde_json::from_str(&text)
        .map_err(|e| Error::Format(format!("model file {}: {e}", path.display())))?;
    if bundle.format != MODEL_FORMAT {
        return Err(Error::Format(format!(
            "model file {} has format {:?}, this build reads {MODEL_FORMAT:?}",
            path.display(),
            bundle.format
        )));
    }
    Ok(bundle)
}

//! Versioned JSON model files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::models::mlp::CLASSES;
use crate::models::train::Classifier;

pub const MODEL_FORMAT: &str = "compnli-classifier";
pub const MODEL_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u64,
    #[serde(flatten)]
    classifier: Classifier,
}

pub fn classifier_to_json(classifier: &Classifier) -> Result<String> {
    let env = Envelope {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        classifier: classifier.clone(),
    };
    Ok(serde_json::to_string(&env)?)
}

pub fn classifier_from_json(text: &str) -> Result<Classifier> {
    let value: Value = serde_json::from_str(text)?;
    match value.get("format").and_then(Value::as_str) {
        Some(MODEL_FORMAT) => {}
        Some(other) => return Err(Error::ModelFormat(format!("unknown format {other:?}"))),
        None => return Err(Error::ModelFormat("missing format tag".into())),
    }
    match value.get("version").and_then(Value::as_u64) {
        Some(MODEL_VERSION) => {}
        Some(v) => {
            return Err(Error::ModelFormat(format!(
                "version {v} is not supported (expected {MODEL_VERSION})"
            )))
        }
        None => return Err(Error::ModelFormat("missing version".into())),
    }
    let env: Envelope = serde_json::from_value(value)?;
    let c = env.classifier;
    let mlp = &c.mlp;
    let expected_input = c.combiner.blocks() * c.encoder.output_dim(c.embedding_dim);
    if mlp.input_dim != expected_input
        || mlp.w1.len() != mlp.hidden_dim * mlp.input_dim
        || mlp.b1.len() != mlp.hidden_dim
        || mlp.w2.len() != CLASSES * mlp.hidden_dim
        || mlp.b2.len() != CLASSES
    {
        return Err(Error::ModelFormat(
            "weight shapes do not match the declared dimensions".into(),
        ));
    }
    Ok(c)
}

pub fn save_classifier(classifier: &Classifier, path: &Path) -> Result<()> {
    fs::write(path, classifier_to_json(classifier)?).map_err(|e| Error::io(path, e))
}

pub fn load_classifier(path: &Path) -> Result<Classifier> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    classifier_from_json(&text)
}

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CrfError, CrfHyperparams, CrfModel, FeatureTable};
use crate::corpus::BioLabel;

pub const MODEL_FORMAT: &str = "trowel-crf/1";

/// On-disk layout. Feature weights are keyed by feature name and label;
/// features whose weights are all zero are omitted.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    labels: Vec<BioLabel>,
    hyper: CrfHyperparams,
    /// Weight of the first label, indexed by label.
    start: Vec<f64>,
    /// `transitions[prev][label]`.
    transitions: Vec<Vec<f64>>,
    state_weights: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

impl CrfModel {
    pub fn to_json(&self) -> String {
        let l = self.labels.len();
        let mut state_weights = BTreeMap::new();
        for (id, name) in self.features.names().iter().enumerate() {
            let row = &self.state_weights[id * l..(id + 1) * l];
            let nonzero: BTreeMap<String, f64> = row
                .iter()
                .zip(&self.labels)
                .filter(|(w, _)| **w != 0.0)
                .map(|(w, label)| (label.to_string(), *w))
                .collect();
            if !nonzero.is_empty() {
                state_weights.insert(name.clone(), nonzero);
            }
        }
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            labels: self.labels.clone(),
            hyper: self.hyper,
            start: (0..l).map(|y| self.transition(None, y)).collect(),
            transitions: (0..l)
                .map(|a| (0..l).map(|y| self.transition(Some(a), y)).collect())
                .collect(),
            state_weights,
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CrfError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| CrfError::Format(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(CrfError::Format(format!(
                "unsupported format tag `{}` (expected `{MODEL_FORMAT}`)",
                file.format
            )));
        }
        let l = file.labels.len();
        if file.start.len() != l || file.transitions.len() != l || file.transitions.iter().any(|r| r.len() != l) {
            return Err(CrfError::Format(format!("transition matrix does not match {l} labels")));
        }
        let mut features = FeatureTable::new();
        for name in file.state_weights.keys() {
            features.intern(name);
        }
        let mut model = CrfModel::new(file.labels, features, file.hyper);
        for (name, weights) in &file.state_weights {
            let id = model.features.id(name).expect("interned above");
            for (label, &w) in weights {
                let label: BioLabel = label.parse().map_err(|e: crate::corpus::LabelParseError| CrfError::Format(e.0))?;
                let y = model.label_index(label).ok_or(CrfError::UnknownLabel(label))?;
                model.set_state_weight(id, y, w);
            }
        }
        for y in 0..l {
            model.set_transition(None, y, file.start[y]);
            for a in 0..l {
                model.set_transition(Some(a), y, file.transitions[a][y]);
            }
        }
        if model.weights().iter().any(|w| !w.is_finite()) {
            return Err(CrfError::Format("non-finite weight".into()));
        }
        model.metadata = file.metadata;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self, CrfError> {
        let text = std::fs::read_to_string(path).map_err(|e| CrfError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

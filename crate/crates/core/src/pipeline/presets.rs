use serde::{Deserialize, Serialize};

use super::{FeatureTemplateConfig, PipelineError};

/// External model slots, in the column order used by voting and reports.
pub const MODEL_SLOTS: [&str; 3] = ["multibert", "bertje", "archeobertje"];
/// The domain model; wins three-way voting ties by default.
pub const DEFAULT_PRIORITY: &str = "archeobertje";

const BUILTIN: &str = include_str!("presets.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Vote,
    Crf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsemblePreset {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub strategy: Strategy,
    pub sources: Vec<String>,
    /// Tie-breaking model for voting.
    #[serde(default)]
    pub priority: Option<String>,
    /// Add word, shape, POS and thesaurus features to the CRF.
    #[serde(default)]
    pub baseline: bool,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    5
}

#[derive(Deserialize)]
struct PresetFile {
    preset: Vec<EnsemblePreset>,
}

impl EnsemblePreset {
    pub fn template_config(&self) -> FeatureTemplateConfig {
        let config = if self.baseline {
            FeatureTemplateConfig {
                prediction_sources: self.sources.clone(),
                ..Default::default()
            }
        } else {
            FeatureTemplateConfig::predictions_only(self.sources.clone())
        };
        config.with_window(self.window)
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::PresetFile(format!("preset `{}`: {msg}", self.name)));
        match self.strategy {
            Strategy::Vote => {
                if self.sources.len() != 3 {
                    return bad(format!("voting needs 3 sources, got {}", self.sources.len()));
                }
                if let Some(p) = &self.priority {
                    if !self.sources.contains(p) {
                        return bad(format!("priority `{p}` is not a source"));
                    }
                }
            }
            Strategy::Crf => {
                if self.sources.is_empty() && !self.baseline {
                    return bad("a CRF preset needs sources or baseline features".into());
                }
                self.template_config().validate()?;
            }
        }
        Ok(())
    }

    pub fn priority(&self) -> &str {
        self.priority.as_deref().unwrap_or(DEFAULT_PRIORITY)
    }
}

/// Parses a preset file (`[[preset]]` tables).
pub fn load_presets(text: &str) -> Result<Vec<EnsemblePreset>, PipelineError> {
    let file: PresetFile = toml::from_str(text).map_err(|e| PipelineError::PresetFile(e.to_string()))?;
    for p in &file.preset {
        p.validate()?;
    }
    Ok(file.preset)
}

pub fn builtin_presets() -> Vec<EnsemblePreset> {
    load_presets(BUILTIN).expect("built-in presets parse")
}

pub fn preset(name: &str) -> Result<EnsemblePreset, PipelineError> {
    builtin_presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| PipelineError::UnknownPreset(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_builtin_presets() {
        let names: Vec<String> = builtin_presets().into_iter().map(|p| p.name).collect();
        assert_eq!(
            names,
            ["majority-vote", "crf-all-preds", "crf-archeo-only", "crf-all-preds-baseline", "crf-archeo-baseline"]
        );
    }

    #[test]
    fn archeo_only_is_prediction_stacking() {
        let p = preset("crf-archeo-only").unwrap();
        assert_eq!(p.strategy, Strategy::Crf);
        let c = p.template_config();
        assert!(!c.has_baseline());
        assert_eq!(c.prediction_sources, vec!["archeobertje"]);
        assert_eq!(c.window, 5);
        assert!(preset("crf-archeo-baseline").unwrap().template_config().has_baseline());
        assert!(matches!(preset("nope"), Err(PipelineError::UnknownPreset(_))));
    }

    #[test]
    fn invalid_files_rejected() {
        let two = "[[preset]]\nname = \"v\"\nstrategy = \"vote\"\nsources = [\"a\", \"b\"]\n";
        assert!(load_presets(two).is_err());
        let even = "[[preset]]\nname = \"c\"\nstrategy = \"crf\"\nsources = [\"a\"]\nwindow = 4\n";
        assert!(load_presets(even).is_err());
        let typo = "[[preset]]\nname = \"c\"\nstrategy = \"crf\"\nsources = [\"a\"]\nbaselin = true\n";
        assert!(load_presets(typo).is_err());
    }
}

//! Windowed token feature templates.
//!
//! Feature names have the form `<kind>@<offset>[=<value>]`, e.g.
//! `w@-1=de`, `shape@0=Xx`, `digit@+2`, `thes=PERIOD@0`,
//! `pred:bertje@+1=B-LOC`. Offsets outside the sentence yield `BOS@-k` or
//! `EOS@+k` instead, and prediction features take the value `BOS`/`EOS`.

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::corpus::{BioLabel, Sentence};
use crate::gazetteer::{ListName, Thesaurus};

/// Named features of one token.
pub type TokenFeatures = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureTemplateConfig {
    /// Odd window width centred on the token; 5 looks two tokens each way.
    pub window: usize,
    /// Lowercased surface.
    pub use_word: bool,
    /// Shape string plus digit, uppercase and punctuation flags.
    pub use_shape: bool,
    pub use_pos: bool,
    pub use_thesaurus: bool,
    /// Prediction sets whose labels become windowed features.
    pub prediction_sources: Vec<String>,
}

impl Default for FeatureTemplateConfig {
    fn default() -> Self {
        FeatureTemplateConfig {
            window: 5,
            use_word: true,
            use_shape: true,
            use_pos: true,
            use_thesaurus: true,
            prediction_sources: Vec::new(),
        }
    }
}

impl FeatureTemplateConfig {
    /// Only prediction features from `sources`.
    pub fn predictions_only(sources: Vec<String>) -> Self {
        FeatureTemplateConfig {
            use_word: false,
            use_shape: false,
            use_pos: false,
            use_thesaurus: false,
            prediction_sources: sources,
            ..Default::default()
        }
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(PipelineError::InvalidWindow(self.window));
        }
        Ok(())
    }

    pub fn has_baseline(&self) -> bool {
        self.use_word || self.use_shape || self.use_pos || self.use_thesaurus
    }

    fn radius(&self) -> isize {
        (self.window / 2) as isize
    }
}

/// Character-class pattern with runs collapsed: `X` upper, `x` lower,
/// `9` digit; any other character stands for itself.
pub fn word_shape(word: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in word.chars() {
        let class = if c.is_uppercase() {
            'X'
        } else if c.is_alphabetic() {
            'x'
        } else if c.is_numeric() {
            '9'
        } else {
            c
        };
        if last != Some(class) {
            out.push(class);
            last = Some(class);
        }
    }
    out
}

fn is_punct(word: &str) -> bool {
    word.chars().all(|c| !c.is_alphanumeric())
}

fn offset_tag(delta: isize) -> String {
    if delta > 0 {
        format!("+{delta}")
    } else {
        delta.to_string()
    }
}

/// Baseline features for every token of `sentence`.
///
/// Tokens with an empty POS column produce no POS feature.
pub fn extract_baseline_features(
    sentence: &Sentence,
    config: &FeatureTemplateConfig,
    thesaurus: Option<&Thesaurus>,
) -> Vec<TokenFeatures> {
    let n = sentence.len();
    let mut out = vec![Vec::new(); n];
    if !config.has_baseline() {
        return out;
    }
    let surfaces = sentence.surfaces();
    let flags = match thesaurus {
        Some(t) if config.use_thesaurus => t.membership_features(&surfaces),
        _ => Vec::new(),
    };
    // per-token features without the offset, computed once
    let local: Vec<Vec<(String, Option<String>)>> = sentence
        .tokens
        .iter()
        .enumerate()
        .map(|(i, tok)| {
            let mut f = Vec::new();
            if config.use_word {
                f.push(("w".to_string(), Some(tok.surface.to_lowercase())));
            }
            if config.use_shape {
                f.push(("shape".to_string(), Some(word_shape(&tok.surface))));
                if tok.surface.chars().any(char::is_numeric) {
                    f.push(("digit".to_string(), None));
                }
                if tok.surface.chars().any(char::is_uppercase) {
                    f.push(("upper".to_string(), None));
                }
                if is_punct(&tok.surface) {
                    f.push(("punct".to_string(), None));
                }
            }
            if config.use_pos && !tok.pos.is_empty() {
                f.push(("pos".to_string(), Some(tok.pos.clone())));
            }
            if let Some(fl) = flags.get(i) {
                for list in ListName::ALL {
                    if fl.get(list) {
                        f.push((format!("thes={}", list.as_str()), None));
                    }
                }
            }
            f
        })
        .collect();

    let r = config.radius();
    for (t, feats) in out.iter_mut().enumerate() {
        for delta in -r..=r {
            let j = t as isize + delta;
            let at = offset_tag(delta);
            if j < 0 {
                feats.push(format!("BOS@{at}"));
            } else if j >= n as isize {
                feats.push(format!("EOS@{at}"));
            } else {
                for (name, value) in &local[j as usize] {
                    match value {
                        Some(v) => feats.push(format!("{name}@{at}={v}")),
                        None => feats.push(format!("{name}@{at}")),
                    }
                }
            }
        }
    }
    out
}

/// Baseline features (when any baseline toggle is on) plus windowed
/// prediction features for each configured source.
///
/// `predictions` pairs model names with that model's labels for this
/// sentence; every configured source must be present.
pub fn stack_features(
    config: &FeatureTemplateConfig,
    sentence: &Sentence,
    predictions: &[(&str, &[BioLabel])],
    thesaurus: Option<&Thesaurus>,
) -> Result<Vec<TokenFeatures>, PipelineError> {
    config.validate()?;
    let mut out = extract_baseline_features(sentence, config, thesaurus);
    let n = sentence.len();
    let r = config.radius();
    for source in &config.prediction_sources {
        let labels = predictions
            .iter()
            .find(|(name, _)| name == source)
            .map(|(_, l)| *l)
            .ok_or_else(|| PipelineError::MissingSource(source.clone()))?;
        if labels.len() != n {
            return Err(PipelineError::Shape(format!(
                "{source}: {} labels for a {n}-token sentence",
                labels.len()
            )));
        }
        for (t, feats) in out.iter_mut().enumerate() {
            for delta in -r..=r {
                let j = t as isize + delta;
                let value = if j < 0 {
                    "BOS".to_string()
                } else if j >= n as isize {
                    "EOS".to_string()
                } else {
                    labels[j as usize].to_string()
                };
                feats.push(format!("pred:{source}@{}={value}", offset_tag(delta)));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EntityType, Token};
    use crate::gazetteer::load_thesaurus;
    use proptest::prelude::*;

    fn sentence(words: &[(&str, &str)]) -> Sentence {
        Sentence::new(words.iter().map(|(w, p)| Token::new(*w, *p, None).unwrap()).collect()).unwrap()
    }

    #[test]
    fn shapes() {
        assert_eq!(word_shape("Swifterbant"), "Xx");
        assert_eq!(word_shape("150-210"), "9-9");
        assert_eq!(word_shape("aardewerkscherven"), "x");
        assert_eq!(word_shape("B.V."), "X.X.");
        assert_eq!(word_shape("IJzertijd"), "Xx");
        assert_eq!(word_shape("..."), ".");
    }

    #[test]
    fn sentence_start_has_bos() {
        let s = sentence(&[("Een", "DET"), ("urn", "N")]);
        let f = extract_baseline_features(&s, &FeatureTemplateConfig::default(), None);
        assert!(f[0].contains(&"BOS@-1".to_string()));
        assert!(f[0].contains(&"BOS@-2".to_string()));
        assert!(f[0].contains(&"EOS@+2".to_string()));
        assert!(!f[0].contains(&"EOS@+1".to_string()));
        assert!(f[0].contains(&"w@+1=urn".to_string()));
        assert!(f[1].contains(&"pos@-1=DET".to_string()));
        assert!(f[0].contains(&"upper@0".to_string()));
    }

    #[test]
    fn thesaurus_flags_in_window() {
        let th = load_thesaurus("PERIOD\tbronze age\t-2000\t-800\nARTEFACT\turn\n").unwrap();
        let s = sentence(&[("urn", "N"), ("uit", "P"), ("Bronze", "ADJ"), ("Age", "N")]);
        let f = extract_baseline_features(&s, &FeatureTemplateConfig::default(), Some(&th));
        assert!(f[0].contains(&"thes=ARTEFACT@0".to_string()));
        assert!(f[0].contains(&"thes=PERIOD@+2".to_string()));
        assert!(f[3].contains(&"thes=PERIOD@-1".to_string()));
        assert!(!f[1].contains(&"thes=PERIOD@0".to_string()));
    }

    #[test]
    fn single_source_window_five() {
        let s = sentence(&[("a", "X"), ("b", "X"), ("c", "X")]);
        let labels = vec![BioLabel::O, BioLabel::B(EntityType::Artefact), BioLabel::O];
        let config = FeatureTemplateConfig::predictions_only(vec!["archeobertje".into()]);
        let f = stack_features(&config, &s, &[("archeobertje", &labels)], None).unwrap();
        for tok in &f {
            assert_eq!(tok.len(), 5);
        }
        assert_eq!(
            f[0],
            vec![
                "pred:archeobertje@-2=BOS",
                "pred:archeobertje@-1=BOS",
                "pred:archeobertje@0=O",
                "pred:archeobertje@+1=B-ART",
                "pred:archeobertje@+2=O",
            ]
        );
        let missing = FeatureTemplateConfig::predictions_only(vec!["bertje".into()]);
        assert!(matches!(
            stack_features(&missing, &s, &[("archeobertje", &labels)], None),
            Err(PipelineError::MissingSource(_))
        ));
    }

    #[test]
    fn even_window_rejected() {
        let s = sentence(&[("a", "X")]);
        let config = FeatureTemplateConfig {
            window: 4,
            ..Default::default()
        };
        assert!(matches!(stack_features(&config, &s, &[], None), Err(PipelineError::InvalidWindow(4))));
    }

    proptest! {
        #[test]
        fn stacking_is_a_superset(words in prop::collection::vec("[A-Za-z0-9.,-]{1,6}", 1..8), window in prop::sample::select(vec![1usize, 3, 5, 7])) {
            let s = Sentence::new(words.iter().map(|w| Token::new(w.as_str(), "N", None).unwrap()).collect()).unwrap();
            let labels: Vec<BioLabel> = (0..s.len()).map(|i| BioLabel::ALL[i % 13]).collect();
            let base = FeatureTemplateConfig { window, ..Default::default() };
            let plain = extract_baseline_features(&s, &base, None);
            let same = stack_features(&base, &s, &[], None).unwrap();
            prop_assert_eq!(&plain, &same);
            let both = FeatureTemplateConfig { prediction_sources: vec!["a".into(), "b".into()], ..base.clone() };
            let stacked = stack_features(&both, &s, &[("a", &labels), ("b", &labels)], None).unwrap();
            let preds_only = stack_features(&FeatureTemplateConfig::predictions_only(vec!["a".into(), "b".into()]).with_window(window), &s, &[("a", &labels), ("b", &labels)], None).unwrap();
            for t in 0..s.len() {
                prop_assert_eq!(preds_only[t].len(), 2 * window);
                for f in plain[t].iter().chain(&preds_only[t]) {
                    prop_assert!(stacked[t].contains(f));
                }
                prop_assert_eq!(stacked[t].len(), plain[t].len() + preds_only[t].len());
            }
        }
    }
}

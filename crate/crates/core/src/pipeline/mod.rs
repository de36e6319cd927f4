//! From token features and external predictions to entity spans.
//!
//! External models are represented only by their label output, aligned
//! token for token with a reference corpus ([`PredictionSet`]). Ensembles
//! either vote over those labels or feed them to a CRF as features.

mod ensemble;
mod features;
mod presets;

use serde::{Deserialize, Serialize};

use crate::corpus::{first_bio_violation, parse_raw, BioLabel, CorpusError, EntityType, TaggedDocument};

pub use ensemble::{predict_crf, run_preset, train_crf, tune_crf, CrfEnsembleInput};
pub use features::{extract_baseline_features, stack_features, word_shape, FeatureTemplateConfig, TokenFeatures};
pub use presets::{builtin_presets, load_presets, preset, EnsemblePreset, Strategy, DEFAULT_PRIORITY, MODEL_SLOTS};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{0}")]
    Shape(String),
    #[error("prediction file misaligned at document `{doc_id}`, sentence {sentence}, token {token} (line {line}): expected `{expected}`, found `{found}`")]
    Misaligned {
        doc_id: String,
        sentence: usize,
        token: usize,
        line: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: missing prediction column")]
    MissingPrediction { line: usize },
    #[error("prediction source `{0}` is not available")]
    MissingSource(String),
    #[error("window must be odd and at least 1, got {0}")]
    InvalidWindow(usize),
    #[error("invalid BIO sequence at position {0}; run bio_repair first")]
    InvalidBio(usize),
    #[error("majority vote needs exactly 3 prediction sets, got {0}")]
    VoteArity(usize),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("preset file: {0}")]
    PresetFile(String),
    #[error(transparent)]
    Crf(#[from] crate::crf::CrfError),
}

/// Labels produced by one model, aligned with a reference corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub model_name: String,
    pub doc_ids: Vec<String>,
    /// Document, then sentence, then token.
    pub labels: Vec<Vec<Vec<BioLabel>>>,
}

impl PredictionSet {
    /// Gold labels of `docs` as a prediction set; unlabelled tokens become `O`.
    pub fn from_gold(model_name: impl Into<String>, docs: &[TaggedDocument]) -> Self {
        PredictionSet {
            model_name: model_name.into(),
            doc_ids: docs.iter().map(|d| d.doc_id.clone()).collect(),
            labels: docs
                .iter()
                .map(|d| {
                    d.sentences
                        .iter()
                        .map(|s| s.tokens.iter().map(|t| t.gold.unwrap_or(BioLabel::O)).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn flatten(&self) -> Vec<BioLabel> {
        self.labels.iter().flatten().flatten().copied().collect()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Vec<BioLabel>> {
        self.labels.iter().flatten()
    }

    pub fn map_sentences(&self, model_name: impl Into<String>, mut f: impl FnMut(&[BioLabel]) -> Vec<BioLabel>) -> Self {
        PredictionSet {
            model_name: model_name.into(),
            doc_ids: self.doc_ids.clone(),
            labels: self
                .labels
                .iter()
                .map(|d| d.iter().map(|s| f(s)).collect())
                .collect(),
        }
    }

    /// Errors unless the set mirrors `docs` document, sentence and token-wise.
    pub fn check_shape(&self, docs: &[TaggedDocument]) -> Result<(), PipelineError> {
        let name = &self.model_name;
        if self.labels.len() != docs.len() || self.doc_ids.len() != docs.len() {
            return Err(PipelineError::Shape(format!(
                "{name}: {} documents for a corpus of {}",
                self.labels.len(),
                docs.len()
            )));
        }
        for ((doc, id), sents) in docs.iter().zip(&self.doc_ids).zip(&self.labels) {
            if *id != doc.doc_id {
                return Err(PipelineError::Shape(format!("{name}: document `{id}` where `{}` expected", doc.doc_id)));
            }
            if sents.len() != doc.sentences.len() {
                return Err(PipelineError::Shape(format!(
                    "{name}: document `{id}` has {} sentences, expected {}",
                    sents.len(),
                    doc.sentences.len()
                )));
            }
            for (i, (s, l)) in doc.sentences.iter().zip(sents).enumerate() {
                if s.len() != l.len() {
                    return Err(PipelineError::Shape(format!(
                        "{name}: document `{id}` sentence {i} has {} labels for {} tokens",
                        l.len(),
                        s.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// The labels of the documents named in `docs`, in that order.
    pub fn select(&self, docs: &[TaggedDocument]) -> Result<PredictionSet, PipelineError> {
        let labels = docs
            .iter()
            .map(|d| {
                self.doc_ids
                    .iter()
                    .position(|id| *id == d.doc_id)
                    .map(|i| self.labels[i].clone())
                    .ok_or_else(|| PipelineError::Shape(format!("{}: no predictions for document `{}`", self.model_name, d.doc_id)))
            })
            .collect::<Result<_, _>>()?;
        Ok(PredictionSet {
            model_name: self.model_name.clone(),
            doc_ids: docs.iter().map(|d| d.doc_id.clone()).collect(),
            labels,
        })
    }
}

/// Reads the fourth column of a CoNLL-style prediction file as the labels
/// of `model_name`. Surfaces must match `corpus` exactly and in order.
pub fn ingest_predictions(
    corpus: &[TaggedDocument],
    text: &str,
    model_name: &str,
) -> Result<PredictionSet, PipelineError> {
    let raw = parse_raw(text)?;
    let mut labels = Vec::with_capacity(corpus.len());
    for (d, doc) in corpus.iter().enumerate() {
        let Some(rdoc) = raw.get(d) else {
            return Err(PipelineError::Shape(format!(
                "{model_name}: prediction file ends after {} of {} documents",
                raw.len(),
                corpus.len()
            )));
        };
        if rdoc.id != doc.doc_id {
            return Err(PipelineError::Shape(format!(
                "{model_name}: line {}: document `{}` where `{}` expected",
                rdoc.line, rdoc.id, doc.doc_id
            )));
        }
        let mut sentences = Vec::with_capacity(doc.sentences.len());
        let mut rows = rdoc.sentences.iter();
        for (s, sentence) in doc.sentences.iter().enumerate() {
            let rsent = rows.next().ok_or_else(|| {
                PipelineError::Shape(format!("{model_name}: document `{}` has too few sentences", doc.doc_id))
            })?;
            let mut out = Vec::with_capacity(sentence.len());
            for (t, token) in sentence.tokens.iter().enumerate() {
                let Some(row) = rsent.get(t) else {
                    let line = rsent.last().map_or(rdoc.line, |r| r.line) + 1;
                    return Err(PipelineError::Misaligned {
                        doc_id: doc.doc_id.clone(),
                        sentence: s,
                        token: t,
                        line,
                        expected: token.surface.clone(),
                        found: String::new(),
                    });
                };
                if row.cols[0] != token.surface {
                    return Err(PipelineError::Misaligned {
                        doc_id: doc.doc_id.clone(),
                        sentence: s,
                        token: t,
                        line: row.line,
                        expected: token.surface.clone(),
                        found: row.cols[0].to_string(),
                    });
                }
                let col = row.cols.get(3).filter(|c| !c.is_empty()).ok_or(PipelineError::MissingPrediction { line: row.line })?;
                out.push(crate::corpus::parse_label(col, row.line)?);
            }
            if let Some(extra) = rsent.get(sentence.len()) {
                return Err(PipelineError::Misaligned {
                    doc_id: doc.doc_id.clone(),
                    sentence: s,
                    token: sentence.len(),
                    line: extra.line,
                    expected: String::new(),
                    found: extra.cols[0].to_string(),
                });
            }
            sentences.push(out);
        }
        if rows.next().is_some() {
            return Err(PipelineError::Shape(format!("{model_name}: document `{}` has extra sentences", doc.doc_id)));
        }
        labels.push(sentences);
    }
    if raw.len() > corpus.len() {
        return Err(PipelineError::Shape(format!(
            "{model_name}: prediction file has {} documents, corpus has {}",
            raw.len(),
            corpus.len()
        )));
    }
    Ok(PredictionSet {
        model_name: model_name.to_string(),
        doc_ids: corpus.iter().map(|d| d.doc_id.clone()).collect(),
        labels,
    })
}

fn vote_one(labels: [BioLabel; 3], priority: usize) -> BioLabel {
    let [a, b, c] = labels;
    if a == b || a == c {
        a
    } else if b == c {
        b
    } else {
        labels[priority]
    }
}

/// Per-token majority over three prediction sets; when all three disagree
/// the set named `priority` decides.
pub fn majority_vote(sets: &[&PredictionSet], priority: &str) -> Result<PredictionSet, PipelineError> {
    let [a, b, c] = sets else {
        return Err(PipelineError::VoteArity(sets.len()));
    };
    let p = sets
        .iter()
        .position(|s| s.model_name == priority)
        .ok_or_else(|| PipelineError::MissingSource(priority.to_string()))?;
    let mismatch = || PipelineError::Shape("prediction sets differ in shape".into());
    if a.labels.len() != b.labels.len() || a.labels.len() != c.labels.len() {
        return Err(mismatch());
    }
    let mut labels = Vec::with_capacity(a.labels.len());
    for ((da, db), dc) in a.labels.iter().zip(&b.labels).zip(&c.labels) {
        if da.len() != db.len() || da.len() != dc.len() {
            return Err(mismatch());
        }
        let mut doc = Vec::with_capacity(da.len());
        for ((sa, sb), sc) in da.iter().zip(db).zip(dc) {
            if sa.len() != sb.len() || sa.len() != sc.len() {
                return Err(mismatch());
            }
            doc.push(
                sa.iter()
                    .zip(sb)
                    .zip(sc)
                    .map(|((&x, &y), &z)| vote_one([x, y, z], p))
                    .collect(),
            );
        }
        labels.push(doc);
    }
    Ok(PredictionSet {
        model_name: "majority-vote".into(),
        doc_ids: a.doc_ids.clone(),
        labels,
    })
}

/// Turns every orphan `I-X` (at the start, or after anything other than
/// `B-X`/`I-X`) into `B-X`.
pub fn bio_repair(labels: &[BioLabel]) -> Vec<BioLabel> {
    let mut out = Vec::with_capacity(labels.len());
    let mut prev: Option<BioLabel> = None;
    for &label in labels {
        let fixed = match label {
            BioLabel::I(t) if prev.and_then(BioLabel::etype) != Some(t) => BioLabel::B(t),
            other => other,
        };
        out.push(fixed);
        prev = Some(fixed);
    }
    out
}

/// A decoded entity mention within one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub etype: EntityType,
    /// Token offsets, end exclusive.
    pub start: usize,
    pub end: usize,
    /// Lowercased, single-space joined surface.
    pub surface: String,
}

pub fn extract_spans(labels: &[BioLabel], surfaces: &[&str]) -> Result<Vec<EntitySpan>, PipelineError> {
    if labels.len() != surfaces.len() {
        return Err(PipelineError::Shape(format!(
            "{} labels for {} tokens",
            labels.len(),
            surfaces.len()
        )));
    }
    if let Some(pos) = first_bio_violation(labels) {
        return Err(PipelineError::InvalidBio(pos));
    }
    let mut spans = Vec::new();
    let mut t = 0;
    while t < labels.len() {
        if let BioLabel::B(etype) = labels[t] {
            let mut end = t + 1;
            while end < labels.len() && labels[end] == BioLabel::I(etype) {
                end += 1;
            }
            let surface = surfaces[t..end]
                .iter()
                .map(|s| s.to_lowercase())
                .collect::<Vec<_>>()
                .join(" ");
            spans.push(EntitySpan {
                etype,
                start: t,
                end,
                surface,
            });
            t = end;
        } else {
            t += 1;
        }
    }
    Ok(spans)
}

/// BIO labels of length `len` for non-overlapping spans.
pub fn render_spans(spans: &[EntitySpan], len: usize) -> Vec<BioLabel> {
    let mut out = vec![BioLabel::O; len];
    for span in spans {
        for (i, slot) in out[span.start..span.end].iter_mut().enumerate() {
            *slot = if i == 0 { BioLabel::B(span.etype) } else { BioLabel::I(span.etype) };
        }
    }
    out
}

/// Spans of every sentence of `docs` under `set`, repairing labels first.
pub fn corpus_spans(docs: &[TaggedDocument], set: &PredictionSet) -> Result<Vec<EntitySpan>, PipelineError> {
    set.check_shape(docs)?;
    let mut spans = Vec::new();
    for (doc, labels) in docs.iter().zip(&set.labels) {
        for (s, l) in doc.sentences.iter().zip(labels) {
            spans.extend(extract_spans(&bio_repair(l), &s.surfaces())?);
        }
    }
    Ok(spans)
}

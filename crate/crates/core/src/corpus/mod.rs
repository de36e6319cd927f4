//! Corpus data model and CoNLL-style I/O.
//!
//! The file layout is one token per line, `surface<TAB>pos<TAB>label`, with
//! optional extra columns for model predictions. A blank line ends a
//! sentence and a line `#doc <id>` starts a new document.

mod conll;
mod folds;
mod label;
mod split;

use serde::{Deserialize, Serialize};

pub use conll::{read_conll, write_conll};
pub(crate) use conll::{parse_label, parse_raw};
pub use folds::{make_folds, FoldSplit};
pub use label::{first_bio_violation, is_valid_bio, BioLabel, EntityType, LabelParseError, Tag};
pub use split::{split_long_sentences, DEFAULT_HARD_LIMIT, DEFAULT_SOFT_LIMIT};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("document `{doc_id}` (line {line}) has no tokens")]
    EmptyDocument { doc_id: String, line: usize },
    #[error("invalid token surface {0:?}: must be non-empty without whitespace")]
    InvalidSurface(String),
    #[error("sentence must contain at least one token")]
    EmptySentence,
    #[error("label shape mismatch in document `{doc_id}`: {detail}")]
    LengthMismatch { doc_id: String, detail: String },
    #[error("invalid sentence limits: soft {soft} must be below hard {hard}")]
    InvalidLimits { soft: usize, hard: usize },
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("cannot split {docs} documents into {k} folds")]
    TooFewDocuments { docs: usize, k: usize },
    #[error("duplicate document id `{0}`")]
    DuplicateDocId(String),
    #[error("fold file: {0}")]
    FoldFile(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Part-of-speech tag; empty when the corpus has none.
    pub pos: String,
    pub gold: Option<BioLabel>,
}

impl Token {
    pub fn new(
        surface: impl Into<String>,
        pos: impl Into<String>,
        gold: Option<BioLabel>,
    ) -> Result<Self, CorpusError> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidSurface(surface));
        }
        Ok(Token {
            surface,
            pos: pos.into(),
            gold,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Result<Self, CorpusError> {
        if tokens.is_empty() {
            return Err(CorpusError::EmptySentence);
        }
        Ok(Sentence { tokens })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    /// Gold labels, or `None` when any token is unlabelled.
    pub fn gold_labels(&self) -> Option<Vec<BioLabel>> {
        self.tokens.iter().map(|t| t.gold).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedDocument {
    pub doc_id: String,
    pub sentences: Vec<Sentence>,
}

impl TaggedDocument {
    pub fn new(doc_id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        TaggedDocument {
            doc_id: doc_id.into(),
            sentences,
        }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }
}

/// Gold labels of every token in every document, sentence by sentence.
///
/// Unlabelled tokens are reported as `O`.
pub fn gold_sentences(docs: &[TaggedDocument]) -> Vec<Vec<BioLabel>> {
    docs.iter()
        .flat_map(|d| d.sentences.iter())
        .map(|s| s.tokens.iter().map(|t| t.gold.unwrap_or(BioLabel::O)).collect())
        .collect()
}

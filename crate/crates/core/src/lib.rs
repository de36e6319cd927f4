//! # trowel
//!
//! Toolkit for entity-driven search over archaeological grey literature.
//!
//! The crate covers the whole path from annotated text to a searchable index:
//!
//! - [`corpus`]: BIO-labelled token data, CoNLL-style I/O, long sentence
//!   splitting and document-level fold assignment.
//! - [`subword`]: greedy longest-match WordPiece encoding, vocabulary
//!   induction and tokenization fertility reports.
//! - [`gazetteer`]: thesaurus lists (periods, artefacts, materials) and
//!   n-gram membership features.
//! - [`crf`]: a linear-chain CRF with L-BFGS / OWL-QN training and Viterbi
//!   decoding.
//! - [`pipeline`]: feature templates, external prediction ingestion,
//!   ensembles, BIO repair and entity span extraction.
//! - [`eval`]: token-level scoring, run statistics, McNemar's test and
//!   error combination mining.
//! - [`chrono`]: period expression normalization to year ranges and
//!   year histograms.
//! - [`search`]: a page-level inverted index with entity, date, facet and
//!   geo filters.

pub mod chrono;
pub mod corpus;
pub mod crf;
pub mod eval;
pub mod gazetteer;
pub mod pipeline;
pub mod search;
pub mod subword;

pub use corpus::{BioLabel, EntityType, Sentence, TaggedDocument, Token};

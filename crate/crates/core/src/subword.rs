//! WordPiece-style subword encoding, vocabulary induction and fertility
//! reports.
//!
//! Continuation pieces carry a `##` prefix. Encoding is greedy
//! longest-match from the left; if any position cannot be matched the
//! whole word becomes the unknown piece.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::TaggedDocument;

pub const UNK_PIECE: &str = "[UNK]";
pub const CONTINUATION: &str = "##";
pub const DEFAULT_MAX_WORD_CHARS: usize = 100;
/// Sentences longer than this many pieces get truncated by BERT-style models.
pub const MAX_SEQUENCE_PIECES: usize = 512;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SubwordError {
    #[error("cannot induce a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("target size {target} must exceed the initial inventory of {inventory} pieces")]
    TargetTooSmall { target: usize, inventory: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubwordVocab {
    pieces: BTreeSet<String>,
    unk_piece: String,
    max_word_chars: usize,
}

impl SubwordVocab {
    /// Builds a vocabulary; the unknown piece is always added and empty
    /// pieces are dropped.
    pub fn new<I, S>(pieces: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut pieces: BTreeSet<String> = pieces
            .into_iter()
            .map(Into::into)
            .filter(|p| !p.is_empty() && p != CONTINUATION)
            .collect();
        pieces.insert(UNK_PIECE.to_string());
        SubwordVocab {
            pieces,
            unk_piece: UNK_PIECE.to_string(),
            max_word_chars: DEFAULT_MAX_WORD_CHARS,
        }
    }

    pub fn with_max_word_chars(mut self, max: usize) -> Self {
        self.max_word_chars = max;
        self
    }

    /// Reads a vocabulary file: one piece per line, blank lines ignored.
    pub fn from_lines(text: &str) -> Self {
        Self::new(text.lines().map(|l| l.trim_end_matches('\r')).filter(|l| !l.trim().is_empty()))
    }

    pub fn to_lines(&self) -> String {
        self.pieces.iter().map(|p| format!("{p}\n")).collect()
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, piece: &str) -> bool {
        self.pieces.contains(piece)
    }

    pub fn pieces(&self) -> impl Iterator<Item = &str> {
        self.pieces.iter().map(String::as_str)
    }

    pub fn unk_piece(&self) -> &str {
        &self.unk_piece
    }

    pub fn encode_word(&self, word: &str) -> Vec<String> {
        let chars: Vec<char> = word.chars().collect();
        if chars.is_empty() || chars.len() > self.max_word_chars {
            return vec![self.unk_piece.clone()];
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        let mut candidate = String::new();
        while start < chars.len() {
            let mut found = None;
            for end in (start + 1..=chars.len()).rev() {
                candidate.clear();
                if start > 0 {
                    candidate.push_str(CONTINUATION);
                }
                candidate.extend(&chars[start..end]);
                if self.pieces.contains(&candidate) {
                    found = Some((end, candidate.clone()));
                    break;
                }
            }
            match found {
                Some((end, piece)) => {
                    pieces.push(piece);
                    start = end;
                }
                None => return vec![self.unk_piece.clone()],
            }
        }
        pieces
    }

    /// Concatenated word encodings; no truncation.
    pub fn encode_sentence<'a, I>(&self, words: I) -> Vec<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        words.into_iter().flat_map(|w| self.encode_word(w)).collect()
    }
}

/// Strips continuation markers and joins pieces back into a word.
pub fn detokenize(pieces: &[String]) -> String {
    pieces
        .iter()
        .map(|p| p.strip_prefix(CONTINUATION).unwrap_or(p))
        .collect()
}

fn initial_pieces(word: &str) -> Vec<String> {
    word.chars()
        .enumerate()
        .map(|(i, c)| if i == 0 { c.to_string() } else { format!("{CONTINUATION}{c}") })
        .collect()
}

fn merge_pair(left: &str, right: &str) -> String {
    format!("{left}{}", right.strip_prefix(CONTINUATION).unwrap_or(right))
}

/// Learns a vocabulary by repeatedly merging the most frequent adjacent
/// piece pair.
///
/// Words start out as single characters, continuation-marked after the
/// first. The initial inventory (those characters plus the unknown piece)
/// must be smaller than `target_size`. Merging stops once the vocabulary
/// reaches `target_size` pieces or no pair occurs at least twice; ties
/// between equally frequent pairs go to the lexicographically smallest.
pub fn induce_vocab<'a, I>(corpus: I, target_size: usize) -> Result<SubwordVocab, SubwordError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut word_freq: BTreeMap<&str, usize> = BTreeMap::new();
    for word in corpus {
        if !word.is_empty() {
            *word_freq.entry(word).or_default() += 1;
        }
    }
    if word_freq.is_empty() {
        return Err(SubwordError::EmptyCorpus);
    }
    let mut words: Vec<(Vec<String>, usize)> = word_freq
        .iter()
        .map(|(w, &f)| (initial_pieces(w), f))
        .collect();
    let mut vocab: BTreeSet<String> = words.iter().flat_map(|(p, _)| p.iter().cloned()).collect();
    vocab.insert(UNK_PIECE.to_string());
    if target_size <= vocab.len() {
        return Err(SubwordError::TargetTooSmall {
            target: target_size,
            inventory: vocab.len(),
        });
    }

    while vocab.len() < target_size {
        let mut pair_freq: BTreeMap<(&str, &str), usize> = BTreeMap::new();
        for (pieces, freq) in &words {
            for pair in pieces.windows(2) {
                *pair_freq.entry((&pair[0], &pair[1])).or_default() += freq;
            }
        }
        // max_by_key keeps the last maximum; iterate in reverse so the
        // lexicographically smallest pair wins ties.
        let Some(((left, right), count)) = pair_freq.into_iter().rev().max_by_key(|(_, c)| *c) else {
            break;
        };
        if count < 2 {
            break;
        }
        let (left, right) = (left.to_string(), right.to_string());
        let merged = merge_pair(&left, &right);
        for (pieces, _) in &mut words {
            let mut i = 0;
            let mut out = Vec::with_capacity(pieces.len());
            while i < pieces.len() {
                if i + 1 < pieces.len() && pieces[i] == left && pieces[i + 1] == right {
                    out.push(merged.clone());
                    i += 2;
                } else {
                    out.push(std::mem::take(&mut pieces[i]));
                    i += 1;
                }
            }
            *pieces = out;
        }
        vocab.insert(merged);
    }
    Ok(SubwordVocab::new(vocab))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FertilityReport {
    pub word_count: usize,
    pub piece_count: usize,
    pub pieces_per_word: f64,
    pub oversize_sentences: usize,
    pub unk_words: usize,
}

impl FertilityReport {
    pub fn to_csv(&self) -> String {
        format!(
            "word_count,piece_count,pieces_per_word,oversize_sentences,unk_words\n{},{},{:.6},{},{}\n",
            self.word_count, self.piece_count, self.pieces_per_word, self.oversize_sentences, self.unk_words
        )
    }
}

/// Aggregate subword statistics over a corpus.
pub fn fertility(vocab: &SubwordVocab, docs: &[TaggedDocument]) -> FertilityReport {
    let mut report = FertilityReport {
        word_count: 0,
        piece_count: 0,
        pieces_per_word: 0.0,
        oversize_sentences: 0,
        unk_words: 0,
    };
    for sentence in docs.iter().flat_map(|d| d.sentences.iter()) {
        let mut pieces = 0;
        for token in &sentence.tokens {
            let encoded = vocab.encode_word(&token.surface);
            if encoded.len() == 1 && encoded[0] == vocab.unk_piece {
                report.unk_words += 1;
            }
            pieces += encoded.len();
        }
        report.word_count += sentence.len();
        report.piece_count += pieces;
        if pieces > MAX_SEQUENCE_PIECES {
            report.oversize_sentences += 1;
        }
    }
    if report.word_count > 0 {
        report.pieces_per_word = report.piece_count as f64 / report.word_count as f64;
    }
    report
}

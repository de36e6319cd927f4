use super::{CorpusError, Sentence, TaggedDocument};

pub const DEFAULT_SOFT_LIMIT: usize = 60;
pub const DEFAULT_HARD_LIMIT: usize = 90;

const BREAK_PUNCT: [&str; 3] = [".", ";", ","];

/// Breaks sentences longer than `hard_limit` tokens.
///
/// A long sentence is cut after the last `.`, `;` or `,` found at 1-based
/// positions `soft_limit + 1 ..= hard_limit`, or after position `hard_limit`
/// when there is none. The remainder is processed the same way until every
/// piece fits.
pub fn split_long_sentences(
    doc: &TaggedDocument,
    soft_limit: usize,
    hard_limit: usize,
) -> Result<TaggedDocument, CorpusError> {
    if soft_limit >= hard_limit {
        return Err(CorpusError::InvalidLimits {
            soft: soft_limit,
            hard: hard_limit,
        });
    }
    let mut sentences = Vec::with_capacity(doc.sentences.len());
    for sentence in &doc.sentences {
        let mut rest = sentence.tokens.as_slice();
        while rest.len() > hard_limit {
            let cut = (soft_limit + 1..=hard_limit)
                .rev()
                .find(|&pos| BREAK_PUNCT.contains(&rest[pos - 1].surface.as_str()))
                .unwrap_or(hard_limit);
            sentences.push(Sentence {
                tokens: rest[..cut].to_vec(),
            });
            rest = &rest[cut..];
        }
        sentences.push(Sentence {
            tokens: rest.to_vec(),
        });
    }
    Ok(TaggedDocument::new(doc.doc_id.clone(), sentences))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;
    use proptest::prelude::*;

    fn doc_with(surfaces: &[&str]) -> TaggedDocument {
        let tokens = surfaces
            .iter()
            .map(|s| Token::new(*s, "N", None).unwrap())
            .collect();
        TaggedDocument::new("d", vec![Sentence { tokens }])
    }

    fn words(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    fn lengths(doc: &TaggedDocument) -> Vec<usize> {
        doc.sentences.iter().map(Sentence::len).collect()
    }

    #[test]
    fn breaks_at_comma() {
        let mut w = words(100);
        w[69] = ",".into();
        let refs: Vec<&str> = w.iter().map(String::as_str).collect();
        let out = split_long_sentences(&doc_with(&refs), 60, 90).unwrap();
        assert_eq!(lengths(&out), vec![70, 30]);
        assert_eq!(out.sentences[0].tokens[69].surface, ",");
    }

    #[test]
    fn last_punctuation_in_window_wins() {
        let mut w = words(100);
        w[64] = ".".into();
        w[79] = ";".into();
        // outside the window on both sides
        w[10] = ",".into();
        w[95] = ",".into();
        let refs: Vec<&str> = w.iter().map(String::as_str).collect();
        let out = split_long_sentences(&doc_with(&refs), 60, 90).unwrap();
        assert_eq!(lengths(&out), vec![80, 20]);
    }

    #[test]
    fn punctuation_at_soft_limit_is_outside_window() {
        let mut w = words(95);
        w[59] = ",".into(); // position 60
        let refs: Vec<&str> = w.iter().map(String::as_str).collect();
        let out = split_long_sentences(&doc_with(&refs), 60, 90).unwrap();
        assert_eq!(lengths(&out), vec![90, 5]);
    }

    #[test]
    fn hard_limit_branch() {
        let w = words(95);
        let refs: Vec<&str> = w.iter().map(String::as_str).collect();
        let out = split_long_sentences(&doc_with(&refs), 60, 90).unwrap();
        assert_eq!(lengths(&out), vec![90, 5]);
    }

    #[test]
    fn short_sentence_unchanged() {
        let w = words(50);
        let refs: Vec<&str> = w.iter().map(String::as_str).collect();
        let doc = doc_with(&refs);
        assert_eq!(split_long_sentences(&doc, 60, 90).unwrap(), doc);
    }

    #[test]
    fn iterates_until_everything_fits() {
        let w = words(200);
        let refs: Vec<&str> = w.iter().map(String::as_str).collect();
        let out = split_long_sentences(&doc_with(&refs), 60, 90).unwrap();
        assert_eq!(lengths(&out), vec![90, 90, 20]);
    }

    #[test]
    fn invalid_limits() {
        let doc = doc_with(&["a"]);
        assert!(matches!(
            split_long_sentences(&doc, 90, 90),
            Err(CorpusError::InvalidLimits { .. })
        ));
    }

    proptest! {
        #[test]
        fn preserves_tokens_and_bounds_length(
            lens in prop::collection::vec(1usize..300, 1..4),
            punct_every in 1usize..40,
            soft in 1usize..50,
            extra in 1usize..50,
        ) {
            let hard = soft + extra;
            let mut sentences = Vec::new();
            let mut counter = 0;
            for len in lens {
                let tokens = (0..len).map(|_| {
                    counter += 1;
                    let s = if counter % punct_every == 0 { ",".to_string() } else { format!("t{counter}") };
                    Token::new(s, format!("p{counter}"), None).unwrap()
                }).collect();
                sentences.push(Sentence { tokens });
            }
            let doc = TaggedDocument::new("d", sentences);
            let out = split_long_sentences(&doc, soft, hard).unwrap();
            prop_assert!(out.sentences.iter().all(|s| !s.is_empty() && s.len() <= hard));
            let before: Vec<_> = doc.tokens().cloned().collect();
            let after: Vec<_> = out.tokens().cloned().collect();
            prop_assert_eq!(before, after);
        }
    }
}

use std::path::PathBuf;

use proptest::prelude::*;
use trowel::corpus::{make_folds, read_conll, split_long_sentences, write_conll, BioLabel, Sentence, TaggedDocument, Token};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn sample_corpus_parses() {
    let docs = read_conll(&fixture("sample.conll")).unwrap();
    assert_eq!(docs.len(), 6);
    assert_eq!(docs[0].doc_id, "rapport-001");
    assert_eq!(docs[0].sentences.len(), 2);
    assert_eq!(docs[0].sentences[0].tokens[4].surface, "Swifterbant");
    assert_eq!(docs[0].sentences[0].tokens[4].gold, Some("B-LOC".parse().unwrap()));
    assert!(docs.iter().flat_map(|d| d.tokens()).all(|t| t.gold.is_some() && !t.pos.is_empty()));
}

#[test]
fn sample_corpus_round_trips() {
    let docs = read_conll(&fixture("sample.conll")).unwrap();
    let text = write_conll(&docs, None).unwrap();
    assert_eq!(read_conll(&text).unwrap(), docs);
    assert_eq!(write_conll(&read_conll(&text).unwrap(), None).unwrap(), text);
}

#[test]
fn prediction_column_is_written_and_ignored_on_read() {
    let docs = read_conll(&fixture("sample.conll")).unwrap();
    let labels: Vec<Vec<Vec<BioLabel>>> = docs
        .iter()
        .map(|d| d.sentences.iter().map(|s| vec![BioLabel::O; s.len()]).collect())
        .collect();
    let text = write_conll(&docs, Some(&labels)).unwrap();
    assert!(text.lines().filter(|l| l.contains('\t')).all(|l| l.ends_with("\tO")));
    assert_eq!(read_conll(&text).unwrap(), docs);
    assert!(write_conll(&docs, Some(&labels[1..])).is_err());
}

#[test]
fn folds_cover_every_document_once() {
    let docs = read_conll(&fixture("sample.conll")).unwrap();
    let folds = make_folds(&docs, 3).unwrap();
    let mut seen = 0;
    for k in 0..3 {
        let (train, test) = folds.partition(&docs, k);
        assert_eq!(train.len() + test.len(), docs.len());
        seen += test.len();
    }
    assert_eq!(seen, docs.len());
    let again = trowel::corpus::FoldSplit::from_csv(&folds.to_csv()).unwrap();
    assert_eq!(again, folds);
}

fn arb_token() -> impl Strategy<Value = Token> {
    (
        "[A-Za-z0-9.,;()-]{1,8}",
        prop_oneof![Just(String::new()), "[A-Z]{1,5}"],
        prop::option::of(0usize..13),
    )
        .prop_map(|(s, pos, gold)| Token::new(s, pos, gold.map(|i| BioLabel::ALL[i])).unwrap())
}

fn arb_doc() -> impl Strategy<Value = TaggedDocument> {
    (
        "[a-z]{1,6}-[0-9]{1,3}",
        prop::collection::vec(prop::collection::vec(arb_token(), 1..12), 1..5),
    )
        .prop_map(|(id, sentences)| {
            TaggedDocument::new(id, sentences.into_iter().map(|t| Sentence::new(t).unwrap()).collect())
        })
}

proptest! {
    #[test]
    fn write_then_read_is_identity(docs in prop::collection::vec(arb_doc(), 0..4)) {
        // a token without POS but with a label cannot be told apart from
        // one with an empty label column, so give those a POS
        let docs: Vec<TaggedDocument> = docs
            .into_iter()
            .map(|mut d| {
                for s in &mut d.sentences {
                    for t in &mut s.tokens {
                        if t.pos.is_empty() && t.gold.is_some() {
                            t.pos = "X".into();
                        }
                    }
                }
                d
            })
            .collect();
        let text = write_conll(&docs, None).unwrap();
        prop_assert_eq!(read_conll(&text).unwrap(), docs);
    }

    #[test]
    fn splitting_preserves_tokens(doc in arb_doc(), soft in 1usize..6, extra in 1usize..6) {
        let hard = soft + extra;
        let split = split_long_sentences(&doc, soft, hard).unwrap();
        prop_assert!(split.sentences.iter().all(|s| s.len() <= hard && !s.is_empty()));
        let before: Vec<&Token> = doc.tokens().collect();
        let after: Vec<&Token> = split.tokens().collect();
        prop_assert_eq!(before, after);
    }
}

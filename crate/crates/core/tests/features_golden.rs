//! Feature names for the first fixture document, checked against a stored
//! listing. Set `TROWEL_UPDATE_GOLDEN=1` to rewrite it after an intended
//! template change.

use std::path::PathBuf;

use trowel::corpus::{read_conll, BioLabel};
use trowel::gazetteer::load_thesaurus;
use trowel::pipeline::{extract_baseline_features, stack_features, FeatureTemplateConfig};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn render(rows: &[Vec<String>], surfaces: &[&str]) -> String {
    let mut out = String::new();
    for (s, feats) in surfaces.iter().zip(rows) {
        out.push_str(s);
        out.push('\t');
        out.push_str(&feats.join(" "));
        out.push('\n');
    }
    out
}

fn check_golden(name: &str, actual: &str) {
    let path = dir().join("tests/golden").join(name);
    if std::env::var_os("TROWEL_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
    assert_eq!(actual, expected, "{name} changed; rerun with TROWEL_UPDATE_GOLDEN=1 if intended");
}

#[test]
fn baseline_feature_names() {
    let docs = read_conll(&std::fs::read_to_string(dir().join("fixtures/sample.conll")).unwrap()).unwrap();
    let th = load_thesaurus(&std::fs::read_to_string(dir().join("fixtures/thesaurus.tsv")).unwrap()).unwrap();
    let sentence = &docs[0].sentences[1];
    let rows = extract_baseline_features(sentence, &FeatureTemplateConfig::default(), Some(&th));
    check_golden("baseline_features.txt", &render(&rows, &sentence.surfaces()));
}

#[test]
fn stacked_feature_names() {
    let docs = read_conll(&std::fs::read_to_string(dir().join("fixtures/sample.conll")).unwrap()).unwrap();
    let sentence = &docs[0].sentences[0];
    let gold = sentence.gold_labels().unwrap();
    let shifted: Vec<BioLabel> = gold.iter().rev().copied().collect();
    let config = FeatureTemplateConfig::predictions_only(vec!["bertje".into(), "archeobertje".into()]);
    let rows = stack_features(&config, sentence, &[("bertje", &gold), ("archeobertje", &shifted)], None).unwrap();
    check_golden("stacked_features.txt", &render(&rows, &sentence.surfaces()));
}

//! Synthetic corpus for trying the tool chain end to end.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trowel::corpus::{write_conll, BioLabel, EntityType, Sentence, TaggedDocument, Token};
use trowel::gazetteer::load_thesaurus;
use trowel::pipeline::{corpus_spans, PredictionSet, MODEL_SLOTS};
use trowel::search::{PageMetadata, PageRecord};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory; created when missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Number of documents.
    #[arg(long, default_value_t = 40)]
    pub docs: usize,
    /// Sentences per document.
    #[arg(long, default_value_t = 8)]
    pub sentences_per_doc: usize,
}

const FILLERS: [(&str, &str); 14] = [
    ("de", "DET"),
    ("het", "DET"),
    ("een", "DET"),
    ("in", "ADP"),
    ("op", "ADP"),
    ("bij", "ADP"),
    ("werd", "AUX"),
    ("is", "AUX"),
    ("gevonden", "VERB"),
    ("aangetroffen", "VERB"),
    ("en", "CCONJ"),
    ("veel", "DET"),
    ("onderzoek", "NOUN"),
    ("spoor", "NOUN"),
];

const ENTITIES: [(&str, EntityType); 16] = [
    ("urn", EntityType::Artefact),
    ("bijl", EntityType::Artefact),
    ("scherf", EntityType::Artefact),
    ("kuil", EntityType::Context),
    ("greppel", EntityType::Context),
    ("crematie", EntityType::Context),
    ("Swifterbant", EntityType::Location),
    ("Dorestad", EntityType::Location),
    ("Nijmegen", EntityType::Location),
    ("houtskool", EntityType::Material),
    ("vuursteen", EntityType::Material),
    ("brons", EntityType::Material),
    ("rund", EntityType::Species),
    ("varken", EntityType::Species),
    ("bronstijd", EntityType::Period),
    ("ijzertijd", EntityType::Period),
];

const PERIODS: [(&str, &str, i64, i64); 4] = [
    ("late", "bronstijd", -1100, -800),
    ("vroege", "ijzertijd", -800, -500),
    ("midden", "neolithicum", -4200, -2850),
    ("romeinse", "tijd", -12, 450),
];

fn thesaurus_tsv() -> String {
    let mut out = String::from("# list\tphrase\tstart\tend\n");
    for (a, b, s, e) in PERIODS {
        out.push_str(&format!("PERIOD\t{a} {b}\t{s}\t{e}\n"));
    }
    out.push_str("PERIOD\tbronstijd\t-2000\t-800\nPERIOD\tijzertijd\t-800\t-12\n");
    for (w, t) in ENTITIES {
        let list = match t {
            EntityType::Artefact => "ARTEFACT",
            EntityType::Material => "MATERIAL",
            _ => continue,
        };
        out.push_str(&format!("{list}\t{w}\n"));
    }
    out
}

fn sentence(rng: &mut ChaCha8Rng) -> Sentence {
    let mut tokens = Vec::new();
    let len = rng.random_range(5..=14);
    while tokens.len() < len {
        match rng.random_range(0..10) {
            0..=5 => {
                let (w, pos) = FILLERS.choose(rng).expect("non-empty");
                tokens.push(Token::new(*w, *pos, Some(BioLabel::O)).expect("valid surface"));
            }
            6..=8 => {
                let (w, t) = ENTITIES.choose(rng).expect("non-empty");
                let pos = if *t == EntityType::Location { "PROPN" } else { "NOUN" };
                tokens.push(Token::new(*w, pos, Some(BioLabel::B(*t))).expect("valid surface"));
            }
            _ => {
                let (a, b, _, _) = PERIODS.choose(rng).expect("non-empty");
                tokens.push(Token::new(*a, "ADJ", Some(BioLabel::B(EntityType::Period))).expect("valid surface"));
                tokens.push(Token::new(*b, "NOUN", Some(BioLabel::I(EntityType::Period))).expect("valid surface"));
            }
        }
    }
    tokens.push(Token::new(".", "PUNCT", Some(BioLabel::O)).expect("valid surface"));
    Sentence::new(tokens).expect("non-empty sentence")
}

/// Gold labels with each token replaced by a random label at `error_rate`.
fn noisy_copy(gold: &PredictionSet, name: &str, error_rate: f64, rng: &mut ChaCha8Rng) -> PredictionSet {
    gold.map_sentences(name, |labels| {
        labels
            .iter()
            .map(|&l| {
                if rng.random_bool(error_rate) {
                    BioLabel::ALL[rng.random_range(0..BioLabel::ALL.len())]
                } else {
                    l
                }
            })
            .collect()
    })
}

pub fn synth(args: &SynthArgs, seed: u64) -> Result<()> {
    if args.docs == 0 || args.sentences_per_doc == 0 {
        bail!("--docs and --sentences-per-doc must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs: Vec<TaggedDocument> = (0..args.docs)
        .map(|d| {
            let sentences = (0..args.sentences_per_doc).map(|_| sentence(&mut rng)).collect();
            TaggedDocument::new(format!("synth-{d:04}"), sentences)
        })
        .collect();
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let write = |name: &str, text: &str| {
        let path = args.out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    write("corpus.conll", &write_conll(&docs, None)?)?;
    let thesaurus = thesaurus_tsv();
    write("thesaurus.tsv", &thesaurus)?;

    let gold = PredictionSet::from_gold("gold", &docs);
    for (name, rate) in MODEL_SLOTS.iter().zip([0.2, 0.15, 0.1]) {
        let set = noisy_copy(&gold, name, rate, &mut rng);
        write(&format!("{name}.conll"), &write_conll(&docs, Some(&set.labels))?)?;
    }

    let thesaurus = load_thesaurus(&thesaurus)?;
    let mut pages = String::new();
    for (doc, labels) in docs.iter().zip(&gold.labels) {
        let one = PredictionSet {
            model_name: "gold".into(),
            doc_ids: vec![doc.doc_id.clone()],
            labels: vec![labels.clone()],
        };
        let spans = corpus_spans(std::slice::from_ref(doc), &one)?;
        let mut entities: BTreeMap<EntityType, Vec<String>> = BTreeMap::new();
        for s in &spans {
            let list = entities.entry(s.etype).or_default();
            if !list.contains(&s.surface) {
                list.push(s.surface.clone());
            }
        }
        let year_ranges = spans
            .iter()
            .filter(|s| s.etype == EntityType::Period)
            .filter_map(|s| trowel::chrono::normalize(&s.surface, Some(&thesaurus)))
            .collect();
        let record = PageRecord {
            doc_id: doc.doc_id.clone(),
            page_no: 1,
            text: doc.sentences.iter().map(|s| s.surfaces().join(" ")).collect::<Vec<_>>().join("\n"),
            entities,
            year_ranges,
            metadata: PageMetadata {
                doc_type: ["report", "thesis", "article"][rng.random_range(0..3)].into(),
                subject: ["burials", "settlement", "field survey"][rng.random_range(0..3)].into(),
                coord: Some([rng.random_range(3.4..7.2), rng.random_range(50.8..53.5)]),
            },
        };
        pages.push_str(&serde_json::to_string(&record)?);
        pages.push('\n');
    }
    write("pages.jsonl", &pages)?;
    log::info!("wrote {} documents to {}", docs.len(), args.out.display());
    Ok(())
}

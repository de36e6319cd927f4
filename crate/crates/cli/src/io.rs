use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use trowel::corpus::{read_conll, write_conll, TaggedDocument};
use trowel::gazetteer::{load_thesaurus, Thesaurus};
use trowel::pipeline::{ingest_predictions, PipelineError, PredictionSet};

/// `NAME=PATH` pair for a prediction file.
#[derive(Debug, Clone)]
pub struct PredArg {
    pub name: String,
    pub path: PathBuf,
}

pub fn parse_pred_arg(s: &str) -> Result<PredArg, String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok(PredArg {
            name: name.to_string(),
            path: PathBuf::from(path),
        }),
        _ => Err(format!("expected NAME=PATH, got `{s}`")),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        return std::io::read_to_string(std::io::stdin()).context("reading stdin");
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_corpus(path: &Path) -> Result<Vec<TaggedDocument>> {
    read_conll(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_thesaurus(path: Option<&Path>) -> Result<Option<Thesaurus>> {
    path.map(|p| load_thesaurus(&read_text(p)?).with_context(|| format!("parsing {}", p.display())))
        .transpose()
}

/// Labels from `path` aligned with `docs`: the prediction column when the
/// file has one, otherwise its gold column.
pub fn read_labels(docs: &[TaggedDocument], path: &Path, name: &str) -> Result<PredictionSet> {
    let text = read_text(path)?;
    match ingest_predictions(docs, &text, name) {
        Ok(set) => Ok(set),
        Err(PipelineError::MissingPrediction { .. }) => {
            let other = read_conll(&text).with_context(|| format!("parsing {}", path.display()))?;
            let same_tokens = other.len() == docs.len()
                && other.iter().zip(docs).all(|(a, b)| {
                    a.doc_id == b.doc_id
                        && a.sentences.len() == b.sentences.len()
                        && a.sentences.iter().zip(&b.sentences).all(|(x, y)| x.surfaces() == y.surfaces())
                });
            if !same_tokens {
                bail!("{}: tokens do not match the reference corpus", path.display());
            }
            if other.iter().flat_map(|d| d.tokens()).any(|t| t.gold.is_none()) {
                bail!("{}: some tokens carry no label", path.display());
            }
            Ok(PredictionSet::from_gold(name, &other))
        }
        Err(e) => Err(e).with_context(|| format!("reading predictions from {}", path.display())),
    }
}

pub fn read_prediction_sets(docs: &[TaggedDocument], preds: &[PredArg]) -> Result<Vec<PredictionSet>> {
    preds.iter().map(|p| read_labels(docs, &p.path, &p.name)).collect()
}

/// Fails early when the directory an output goes to does not exist.
pub fn check_output(path: Option<&Path>) -> Result<()> {
    if let Some(p) = path.filter(|p| *p != Path::new("-")) {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            bail!("output directory {} does not exist", parent.display());
        }
    }
    Ok(())
}

/// Writes to `path`, or stdout when it is absent or `-`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path.filter(|p| *p != Path::new("-")) {
        Some(p) => fs::write(p, contents).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn write_predictions(path: Option<&Path>, docs: &[TaggedDocument], set: &PredictionSet) -> Result<()> {
    write_output(path, &write_conll(docs, Some(&set.labels))?)
}

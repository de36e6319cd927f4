use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use trowel::corpus::{make_folds, split_long_sentences, write_conll, BioLabel, FoldSplit, TaggedDocument, DEFAULT_HARD_LIMIT, DEFAULT_SOFT_LIMIT};
use trowel::crf::{default_grid, CrfHyperparams, CrfModel};
use trowel::eval::score_flat;
use trowel::gazetteer::Thesaurus;
use trowel::pipeline::{
    bio_repair, builtin_presets, load_presets, majority_vote, predict_crf, run_preset, train_crf, tune_crf,
    CrfEnsembleInput, EnsemblePreset, FeatureTemplateConfig, PredictionSet, DEFAULT_PRIORITY,
};

use crate::io::{
    check_output, parse_pred_arg, read_corpus, read_labels, read_prediction_sets, read_text, read_thesaurus,
    write_output, write_predictions, PredArg,
};

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// CoNLL corpus.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Output corpus [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Sentences are cut at the last punctuation mark after this many tokens.
    #[arg(long, default_value_t = DEFAULT_SOFT_LIMIT)]
    pub soft_limit: usize,
    /// Longest sentence kept whole.
    #[arg(long, default_value_t = DEFAULT_HARD_LIMIT)]
    pub hard_limit: usize,
}

pub fn preprocess(args: &PreprocessArgs) -> Result<()> {
    check_output(args.out.as_deref())?;
    let docs = read_corpus(&args.input)?;
    let before: usize = docs.iter().map(|d| d.sentences.len()).sum();
    let split = docs
        .iter()
        .map(|d| split_long_sentences(d, args.soft_limit, args.hard_limit))
        .collect::<Result<Vec<_>, _>>()?;
    let after: usize = split.iter().map(|d| d.sentences.len()).sum();
    log::info!("{before} sentences in, {after} out");
    write_output(args.out.as_deref(), &write_conll(&split, None)?)
}

#[derive(Debug, Args)]
pub struct FoldsArgs {
    /// Input corpus.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Number of folds.
    #[arg(short, long, default_value_t = 5)]
    pub k: usize,
    /// `doc_id,fold` CSV [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn folds(args: &FoldsArgs) -> Result<()> {
    check_output(args.out.as_deref())?;
    let docs = read_corpus(&args.input)?;
    let split = make_folds(&docs, args.k)?;
    log::info!("tokens per fold: {:?}", split.fold_sums(&docs));
    write_output(args.out.as_deref(), &split.to_csv())
}

/// Feature template switches shared by training commands.
#[derive(Debug, Args)]
pub struct FeatureArgs {
    /// Prediction file used as features, as NAME=PATH (repeatable).
    #[arg(long = "pred", value_name = "NAME=PATH", value_parser = parse_pred_arg)]
    pub preds: Vec<PredArg>,
    /// Thesaurus TSV for list membership features.
    #[arg(long, value_name = "FILE")]
    pub thesaurus: Option<PathBuf>,
    /// Token window, odd.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Drop the word features.
    #[arg(long)]
    pub no_word: bool,
    /// Drop shape, digit, upper-case and punctuation features.
    #[arg(long)]
    pub no_shape: bool,
    /// Drop the part-of-speech features.
    #[arg(long)]
    pub no_pos: bool,
    /// Drop the thesaurus features.
    #[arg(long)]
    pub no_thesaurus: bool,
}

impl FeatureArgs {
    fn config(&self) -> FeatureTemplateConfig {
        FeatureTemplateConfig {
            window: self.window,
            use_word: !self.no_word,
            use_shape: !self.no_shape,
            use_pos: !self.no_pos,
            use_thesaurus: !self.no_thesaurus,
            prediction_sources: self.preds.iter().map(|p| p.name.clone()).collect(),
        }
    }
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    /// L1 coefficient.
    #[arg(long, default_value_t = CrfHyperparams::default().c1)]
    pub c1: f64,
    /// L2 coefficient.
    #[arg(long, default_value_t = CrfHyperparams::default().c2)]
    pub c2: f64,
    /// Optimizer iteration cap.
    #[arg(long, default_value_t = CrfHyperparams::default().max_iterations)]
    pub max_iterations: usize,
}

impl HyperArgs {
    fn hyper(&self) -> CrfHyperparams {
        CrfHyperparams {
            max_iterations: self.max_iterations,
            ..CrfHyperparams::default().with_regularization(self.c1, self.c2)
        }
    }
}

#[derive(Debug, Args)]
pub struct CrfTrainArgs {
    /// Gold-labelled training corpus.
    #[arg(long, value_name = "FILE")]
    pub train: PathBuf,
    /// Model file to write.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Development corpus; when given, c1 and c2 are picked by grid search.
    #[arg(long, value_name = "FILE")]
    pub dev: Option<PathBuf>,
    /// Prediction files for the development corpus, as NAME=PATH.
    #[arg(long = "dev-pred", value_name = "NAME=PATH", value_parser = parse_pred_arg)]
    pub dev_preds: Vec<PredArg>,
}

pub fn crf_train(args: &CrfTrainArgs) -> Result<()> {
    check_output(Some(&args.model))?;
    let docs = read_corpus(&args.train)?;
    let sets = read_prediction_sets(&docs, &args.features.preds)?;
    let thesaurus = read_thesaurus(args.features.thesaurus.as_deref())?;
    let config = args.features.config();
    let input = CrfEnsembleInput::new(&docs, &sets, thesaurus.as_ref());
    let mut hyper = args.hyper.hyper();
    if let Some(dev) = &args.dev {
        let dev_docs = read_corpus(dev)?;
        let dev_sets = read_prediction_sets(&dev_docs, &args.dev_preds)?;
        let dev_input = CrfEnsembleInput::new(&dev_docs, &dev_sets, thesaurus.as_ref());
        hyper = tune_crf(input, dev_input, &config, &default_grid(), hyper)?;
        log::info!("tuned c1={} c2={}", hyper.c1, hyper.c2);
    }
    let model = train_crf(input, &config, hyper)?;
    log::info!("{} features, {} weights", model.features().len(), model.n_weights());
    model.save(&args.model).with_context(|| format!("writing {}", args.model.display()))
}

#[derive(Debug, Args)]
pub struct CrfPredictArgs {
    /// Trained model file.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Corpus to label.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Prediction files the model was trained to stack, as NAME=PATH.
    #[arg(long = "pred", value_name = "NAME=PATH", value_parser = parse_pred_arg)]
    pub preds: Vec<PredArg>,
    /// Thesaurus TSV for list membership features.
    #[arg(long, value_name = "FILE")]
    pub thesaurus: Option<PathBuf>,
    /// Corpus with a prediction column [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn crf_predict(args: &CrfPredictArgs) -> Result<()> {
    check_output(args.out.as_deref())?;
    let model = CrfModel::load(&args.model)?;
    let docs = read_corpus(&args.input)?;
    let sets = read_prediction_sets(&docs, &args.preds)?;
    let thesaurus = read_thesaurus(args.thesaurus.as_deref())?;
    let pred = predict_crf(&model, CrfEnsembleInput::new(&docs, &sets, thesaurus.as_ref()), None, "crf")?;
    report_against_gold(&docs, &pred);
    write_predictions(args.out.as_deref(), &docs, &pred)
}

#[derive(Debug, Args)]
pub struct VoteArgs {
    /// Reference corpus.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Exactly three prediction files, as NAME=PATH.
    #[arg(long = "pred", value_name = "NAME=PATH", value_parser = parse_pred_arg, num_args = 1, required = true)]
    pub preds: Vec<PredArg>,
    /// Model whose label wins when all three disagree.
    #[arg(long, default_value = DEFAULT_PRIORITY)]
    pub priority: String,
    /// Output file [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn vote(args: &VoteArgs) -> Result<()> {
    check_output(args.out.as_deref())?;
    let docs = read_corpus(&args.input)?;
    let sets = read_prediction_sets(&docs, &args.preds)?;
    let refs: Vec<&PredictionSet> = sets.iter().collect();
    let voted = majority_vote(&refs, &args.priority)?;
    report_against_gold(&docs, &voted);
    write_predictions(args.out.as_deref(), &docs, &voted)
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Preset name; see --list.
    #[arg(long, required_unless_present = "list")]
    pub preset: Option<String>,
    /// Print the available presets and exit.
    #[arg(long)]
    pub list: bool,
    /// Preset file with [[preset]] tables, used instead of the built-in presets.
    #[arg(long, value_name = "FILE")]
    pub presets: Option<PathBuf>,
    /// Gold-labelled corpus; every document is labelled by a model trained
    /// on the other folds.
    #[arg(long, value_name = "FILE", required_unless_present = "list")]
    pub corpus: Option<PathBuf>,
    /// Prediction files for the corpus, as NAME=PATH.
    #[arg(long = "pred", value_name = "NAME=PATH", value_parser = parse_pred_arg)]
    pub preds: Vec<PredArg>,
    /// Fold assignment CSV; without it folds are built with -k.
    #[arg(long, value_name = "FILE")]
    pub folds: Option<PathBuf>,
    /// Number of folds.
    #[arg(short, long, default_value_t = 5)]
    pub k: usize,
    /// Thesaurus TSV for list membership features.
    #[arg(long, value_name = "FILE")]
    pub thesaurus: Option<PathBuf>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Pick c1 and c2 per fold, using the next fold of the training part as
    /// development data.
    #[arg(long)]
    pub tune: bool,
    /// Output file [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn preset_list(path: Option<&Path>) -> Result<Vec<EnsemblePreset>> {
    match path {
        Some(p) => Ok(load_presets(&read_text(p)?)?),
        None => Ok(builtin_presets()),
    }
}

fn owned(docs: Vec<&TaggedDocument>) -> Vec<TaggedDocument> {
    docs.into_iter().cloned().collect()
}

pub fn ensemble(args: &EnsembleArgs) -> Result<()> {
    let presets = preset_list(args.presets.as_deref())?;
    if args.list {
        let mut out = String::new();
        for p in &presets {
            out.push_str(&format!("{}\t{}\n", p.name, p.description));
        }
        return write_output(None, &out);
    }
    let name = args.preset.as_deref().expect("required by clap");
    let Some(preset) = presets.iter().find(|p| p.name == name) else {
        let known: Vec<&str> = presets.iter().map(|p| p.name.as_str()).collect();
        bail!("unknown preset `{name}`; available: {}", known.join(", "));
    };
    check_output(args.out.as_deref())?;
    let docs = read_corpus(args.corpus.as_deref().expect("required by clap"))?;
    let sets = read_prediction_sets(&docs, &args.preds)?;
    let thesaurus = read_thesaurus(args.thesaurus.as_deref())?;
    let split = match &args.folds {
        Some(p) => FoldSplit::from_csv(&read_text(p)?)?,
        None => make_folds(&docs, args.k)?,
    };
    if let Some(doc) = docs.iter().find(|d| split.fold_of(&d.doc_id).is_none()) {
        bail!("document `{}` has no fold", doc.doc_id);
    }

    let mut by_doc: BTreeMap<String, Vec<Vec<BioLabel>>> = BTreeMap::new();
    for fold in 0..split.k {
        let (train, test) = split.partition(&docs, fold);
        let (train, test) = (owned(train), owned(test));
        if test.is_empty() {
            continue;
        }
        let train_sets = sets.iter().map(|s| s.select(&train)).collect::<Result<Vec<_>, _>>()?;
        let test_sets = sets.iter().map(|s| s.select(&test)).collect::<Result<Vec<_>, _>>()?;
        let train_in = CrfEnsembleInput::new(&train, &train_sets, thesaurus.as_ref());
        let hyper = if args.tune {
            tuned_for_fold(&split, fold, &train, &train_sets, thesaurus.as_ref(), preset, args.hyper.hyper())?
        } else {
            args.hyper.hyper()
        };
        let out = run_preset(preset, train_in, CrfEnsembleInput::new(&test, &test_sets, thesaurus.as_ref()), hyper)?;
        log::info!("fold {fold}: {} documents labelled", test.len());
        by_doc.extend(out.doc_ids.into_iter().zip(out.labels));
    }
    let labels = docs
        .iter()
        .map(|d| by_doc.remove(&d.doc_id).expect("every document is in a fold"))
        .collect();
    let result = PredictionSet {
        model_name: preset.name.clone(),
        doc_ids: docs.iter().map(|d| d.doc_id.clone()).collect(),
        labels,
    };
    report_against_gold(&docs, &result);
    write_predictions(args.out.as_deref(), &docs, &result)
}

fn tuned_for_fold(
    split: &FoldSplit,
    fold: usize,
    train: &[TaggedDocument],
    train_sets: &[PredictionSet],
    thesaurus: Option<&Thesaurus>,
    preset: &EnsemblePreset,
    base: CrfHyperparams,
) -> Result<CrfHyperparams> {
    if preset.strategy == trowel::pipeline::Strategy::Vote {
        return Ok(base);
    }
    let dev_fold = (fold + 1) % split.k;
    let (inner, dev): (Vec<TaggedDocument>, Vec<TaggedDocument>) =
        train.iter().cloned().partition(|d| split.fold_of(&d.doc_id) != Some(dev_fold));
    if inner.is_empty() || dev.is_empty() {
        return Ok(base);
    }
    let inner_sets = train_sets.iter().map(|s| s.select(&inner)).collect::<Result<Vec<_>, _>>()?;
    let dev_sets = train_sets.iter().map(|s| s.select(&dev)).collect::<Result<Vec<_>, _>>()?;
    let hyper = tune_crf(
        CrfEnsembleInput::new(&inner, &inner_sets, thesaurus),
        CrfEnsembleInput::new(&dev, &dev_sets, thesaurus),
        &preset.template_config(),
        &default_grid(),
        base,
    )?;
    log::info!("fold {fold}: tuned c1={} c2={}", hyper.c1, hyper.c2);
    Ok(hyper)
}

#[derive(Debug, Args)]
pub struct RepairArgs {
    /// Corpus with a prediction column.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Output file [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn repair(args: &RepairArgs) -> Result<()> {
    check_output(args.out.as_deref())?;
    let docs = read_corpus(&args.input)?;
    let set = read_labels(&docs, &args.input, "input")?;
    let mut changed = 0;
    let fixed = set.map_sentences("repaired", |labels| {
        let out = bio_repair(labels);
        changed += out.iter().zip(labels).filter(|(a, b)| a != b).count();
        out
    });
    log::info!("{changed} labels repaired");
    write_predictions(args.out.as_deref(), &docs, &fixed)
}

/// Logs the micro F1 when the corpus is fully gold-labelled.
fn report_against_gold(docs: &[TaggedDocument], pred: &PredictionSet) {
    if docs.iter().flat_map(|d| d.tokens()).all(|t| t.gold.is_some()) {
        let gold = PredictionSet::from_gold("gold", docs).flatten();
        if let Ok(report) = score_flat(&gold, &pred.flatten()) {
            log::info!("{}: {}", pred.model_name, report.summary().trim_end().replace('\n', "; "));
        }
    }
}

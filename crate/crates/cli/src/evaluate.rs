use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use trowel::chrono::{entity_stats, entity_stats_csv, normalize, year_histogram};
use trowel::eval::{error_combinations, error_combinations_csv, mcnemar, run_stats, score, StdKind};
use trowel::pipeline::{corpus_spans, PredictionSet};

use crate::io::{check_output, parse_pred_arg, read_corpus, read_labels, read_text, read_thesaurus, write_output, PredArg};

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct EvalArgs {
    #[command(subcommand)]
    pub command: Option<EvalCommand>,
    #[command(flatten)]
    pub score: ScoreArgs,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Token-level precision, recall and F1 (the default).
    Score(ScoreArgs),
    /// Mean, standard deviation and failed runs over F1 scores.
    RunStats(RunStatsArgs),
    /// McNemar's test between two systems.
    Mcnemar(McNemarArgs),
    /// Most frequent label combinations where systems disagree on
    /// correctness.
    ErrorCombos(ErrorCombosArgs),
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Gold-labelled corpus.
    #[arg(long, value_name = "FILE")]
    pub gold: Option<PathBuf>,
    /// Predictions (prediction column, or the label column when absent).
    #[arg(long, value_name = "FILE")]
    pub pred: Option<PathBuf>,
    /// Per-label scores CSV.
    #[arg(long, value_name = "FILE")]
    pub per_label: Option<PathBuf>,
    /// Confusion matrix CSV.
    #[arg(long, value_name = "FILE")]
    pub confusion: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunStatsArgs {
    /// F1 scores.
    #[arg(value_name = "F1")]
    pub f1s: Vec<f64>,
    /// File with one F1 score per line.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Use the sample (n - 1) standard deviation.
    #[arg(long)]
    pub sample: bool,
}

#[derive(Debug, Args)]
pub struct McNemarArgs {
    /// Gold-labelled corpus.
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// First system.
    #[arg(long, value_name = "FILE")]
    pub a: PathBuf,
    /// Second system.
    #[arg(long, value_name = "FILE")]
    pub b: PathBuf,
    /// Leave out the continuity correction.
    #[arg(long)]
    pub no_continuity: bool,
}

#[derive(Debug, Args)]
pub struct ErrorCombosArgs {
    /// Gold-labelled corpus.
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// System predictions, as NAME=PATH (at least two).
    #[arg(long = "pred", value_name = "NAME=PATH", value_parser = parse_pred_arg, required = true)]
    pub preds: Vec<PredArg>,
    /// Number of combinations to report.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Output file [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    match &args.command {
        None => eval_score(&args.score),
        Some(EvalCommand::Score(a)) => eval_score(a),
        Some(EvalCommand::RunStats(a)) => eval_run_stats(a),
        Some(EvalCommand::Mcnemar(a)) => eval_mcnemar(a),
        Some(EvalCommand::ErrorCombos(a)) => eval_error_combos(a),
    }
}

fn eval_score(args: &ScoreArgs) -> Result<()> {
    let (Some(gold), Some(pred)) = (&args.gold, &args.pred) else {
        bail!("eval needs --gold and --pred");
    };
    check_output(args.per_label.as_deref())?;
    check_output(args.confusion.as_deref())?;
    let docs = read_corpus(gold)?;
    let gold_set = PredictionSet::from_gold("gold", &docs);
    let pred_set = read_labels(&docs, pred, "pred")?;
    let report = score(&gold_set.sentences().cloned().collect::<Vec<_>>(), &pred_set.sentences().cloned().collect::<Vec<_>>())?;
    if let Some(p) = &args.per_label {
        write_output(Some(p), &report.per_label_csv())?;
    }
    if let Some(p) = &args.confusion {
        write_output(Some(p), &report.confusion_csv())?;
    }
    write_output(None, &report.summary())
}

fn eval_run_stats(args: &RunStatsArgs) -> Result<()> {
    let mut f1s = args.f1s.clone();
    if let Some(path) = &args.input {
        for (i, line) in read_text(path)?.lines().enumerate() {
            let line = line.trim();
            if !line.is_empty() {
                f1s.push(line.parse().with_context(|| format!("{}:{}: not a number", path.display(), i + 1))?);
            }
        }
    }
    let kind = if args.sample { StdKind::Sample } else { StdKind::Population };
    let stats = run_stats(&f1s, kind)?;
    write_output(
        None,
        &format!("runs,mean,std,fail_count\n{},{:.6},{:.6},{}\n", stats.f1s.len(), stats.mean, stats.std, stats.fail_count),
    )
}

fn eval_mcnemar(args: &McNemarArgs) -> Result<()> {
    let docs = read_corpus(&args.gold)?;
    let gold = PredictionSet::from_gold("gold", &docs).flatten();
    let a = read_labels(&docs, &args.a, "a")?.flatten();
    let b = read_labels(&docs, &args.b, "b")?.flatten();
    let r = mcnemar(&gold, &a, &b, !args.no_continuity)?;
    write_output(None, &format!("b,c,chi2\n{},{},{:.6}\n", r.b, r.c, r.chi2))
}

fn eval_error_combos(args: &ErrorCombosArgs) -> Result<()> {
    check_output(args.out.as_deref())?;
    let docs = read_corpus(&args.gold)?;
    let gold = PredictionSet::from_gold("gold", &docs).flatten();
    let preds = args
        .preds
        .iter()
        .map(|p| Ok(read_labels(&docs, &p.path, &p.name)?.flatten()))
        .collect::<Result<Vec<_>>>()?;
    let views: Vec<&[_]> = preds.iter().map(Vec::as_slice).collect();
    let rows = error_combinations(&gold, &views, args.top)?;
    let names: Vec<&str> = args.preds.iter().map(|p| p.name.as_str()).collect();
    write_output(args.out.as_deref(), &error_combinations_csv(&rows, &names))
}

#[derive(Debug, Args)]
pub struct ChronoArgs {
    /// One period expression per line.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Thesaurus TSV with period ranges.
    #[arg(long, value_name = "FILE")]
    pub thesaurus: Option<PathBuf>,
    /// `start,end` CSV, one row per input line [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Year histogram CSV over the parsed ranges.
    #[arg(long, value_name = "FILE")]
    pub histogram: Option<PathBuf>,
}

pub fn chrono(args: &ChronoArgs) -> Result<()> {
    check_output(args.out.as_deref())?;
    check_output(args.histogram.as_deref())?;
    let thesaurus = read_thesaurus(args.thesaurus.as_deref())?;
    let mut out = String::from("start,end\n");
    let mut ranges = Vec::new();
    let mut unparsed = 0;
    for line in read_text(&args.input)?.lines() {
        match normalize(line, thesaurus.as_ref()) {
            Some(r) => {
                out.push_str(&format!("{},{}\n", r.start(), r.end()));
                ranges.push(r);
            }
            None => {
                unparsed += 1;
                out.push_str(",\n");
            }
        }
    }
    log::info!("{} expressions normalized, {unparsed} left empty", ranges.len());
    if let Some(p) = &args.histogram {
        write_output(Some(p), &year_histogram(&ranges).to_csv())?;
    }
    write_output(args.out.as_deref(), &out)
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Corpus; its gold labels are counted unless --pred is given.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Count entities in these predictions instead.
    #[arg(long, value_name = "FILE")]
    pub pred: Option<PathBuf>,
    /// Output file [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn stats(args: &StatsArgs) -> Result<()> {
    check_output(args.out.as_deref())?;
    let docs = read_corpus(&args.input)?;
    let set = match &args.pred {
        Some(p) => read_labels(&docs, p, "pred")?,
        None => PredictionSet::from_gold("gold", &docs),
    };
    let spans = corpus_spans(&docs, &set)?;
    write_output(args.out.as_deref(), &entity_stats_csv(&entity_stats(&spans)))
}

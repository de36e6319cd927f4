//! `trowel` command-line tool.

mod evaluate;
mod io;
mod labeling;
mod search_cmd;
mod subword_cmd;
mod synth;

use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "trowel", version, about = "Entity tagging, evaluation and search for archaeological reports")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    /// Seed for commands that generate data.
    #[arg(long, global = true, default_value_t = 13)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split over-long sentences.
    Preprocess(labeling::PreprocessArgs),
    /// Assign documents to cross-validation folds.
    Folds(labeling::FoldsArgs),
    /// Train a CRF tagger.
    CrfTrain(labeling::CrfTrainArgs),
    /// Label a corpus with a trained CRF.
    CrfPredict(labeling::CrfPredictArgs),
    /// Majority vote over three prediction files.
    Vote(labeling::VoteArgs),
    /// Cross-validated ensemble from a named preset.
    Ensemble(labeling::EnsembleArgs),
    /// Fix I- labels that do not continue an entity.
    Repair(labeling::RepairArgs),
    /// Scores and significance tests.
    Eval(evaluate::EvalArgs),
    /// Normalize period expressions to year ranges.
    Chrono(evaluate::ChronoArgs),
    /// Entity counts per type.
    Stats(evaluate::StatsArgs),
    /// Subword-tokenize text with a vocabulary.
    Tokenize(subword_cmd::TokenizeArgs),
    /// Learn a subword vocabulary.
    Vocab(subword_cmd::VocabArgs),
    /// Add page records to an index directory.
    Index(search_cmd::IndexArgs),
    /// Serve an index over HTTP.
    Serve(search_cmd::ServeArgs),
    /// Run one query against an index directory.
    Query(search_cmd::QueryArgs),
    /// Write a synthetic corpus, prediction files and page records.
    Synth(synth::SynthArgs),
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Preprocess(a) => labeling::preprocess(a),
        Command::Folds(a) => labeling::folds(a),
        Command::CrfTrain(a) => labeling::crf_train(a),
        Command::CrfPredict(a) => labeling::crf_predict(a),
        Command::Vote(a) => labeling::vote(a),
        Command::Ensemble(a) => labeling::ensemble(a),
        Command::Repair(a) => labeling::repair(a),
        Command::Eval(a) => evaluate::eval(a),
        Command::Chrono(a) => evaluate::chrono(a),
        Command::Stats(a) => evaluate::stats(a),
        Command::Tokenize(a) => subword_cmd::tokenize(a),
        Command::Vocab(a) => subword_cmd::vocab(a),
        Command::Index(a) => search_cmd::index(a),
        Command::Serve(a) => search_cmd::serve_cmd(a),
        Command::Query(a) => search_cmd::query(a),
        Command::Synth(a) => synth::synth(a, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Info,
        (false, 1) => log::LevelFilter::Debug,
        (false, _) => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .parse_default_env()
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

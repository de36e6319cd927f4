use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use trowel::subword::{fertility, induce_vocab, SubwordVocab};

use crate::io::{check_output, read_corpus, read_text, write_output};

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    /// Vocabulary, one piece per line.
    #[arg(long, value_name = "FILE")]
    pub vocab: PathBuf,
    /// Plain text, or a CoNLL corpus with --report.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Read a CoNLL corpus and print the fertility report instead.
    #[arg(long)]
    pub report: bool,
    /// Output file [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn tokenize(args: &TokenizeArgs) -> Result<()> {
    check_output(args.out.as_deref())?;
    let vocab = SubwordVocab::from_lines(&read_text(&args.vocab)?);
    if args.report {
        let docs = read_corpus(&args.input)?;
        return write_output(args.out.as_deref(), &fertility(&vocab, &docs).to_csv());
    }
    let mut out = String::new();
    for line in read_text(&args.input)?.lines() {
        out.push_str(&vocab.encode_sentence(line.split_whitespace()).join(" "));
        out.push('\n');
    }
    write_output(args.out.as_deref(), &out)
}

#[derive(Debug, Args)]
pub struct VocabArgs {
    /// Plain text, or a CoNLL corpus with --conll.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Target vocabulary size.
    #[arg(long)]
    pub size: usize,
    /// Input is a CoNLL corpus.
    #[arg(long)]
    pub conll: bool,
    /// Output file [default: stdout].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn vocab(args: &VocabArgs) -> Result<()> {
    check_output(args.out.as_deref())?;
    let words: Vec<String> = if args.conll {
        read_corpus(&args.input)?
            .iter()
            .flat_map(|d| d.tokens().map(|t| t.surface.clone()).collect::<Vec<_>>())
            .collect()
    } else {
        read_text(&args.input)?.split_whitespace().map(String::from).collect()
    };
    let vocab = induce_vocab(words.iter().map(String::as_str), args.size)?;
    log::info!("{} pieces", vocab.len());
    write_output(args.out.as_deref(), &vocab.to_lines())
}

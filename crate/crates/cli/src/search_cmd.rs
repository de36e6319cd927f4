use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use trowel::search::{load_records, Index, Query, SharedIndex};
use trowel_server::{serve, ServerOptions, DEFAULT_MAX_BODY_BYTES};

use crate::io::{read_text, write_output};

const INDEX_DIR_ENV: &str = "TROWEL_INDEX_DIR";

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Index directory; created when missing.
    #[arg(long, env = INDEX_DIR_ENV, value_name = "DIR")]
    pub dir: PathBuf,
    /// Page record files (JSON array or one record per line).
    #[arg(value_name = "FILE", required = true)]
    pub inputs: Vec<PathBuf>,
}

pub fn index(args: &IndexArgs) -> Result<()> {
    let mut records = Vec::new();
    for path in &args.inputs {
        records.extend(load_records(&read_text(path)?).with_context(|| format!("reading {}", path.display()))?);
    }
    let shared = SharedIndex::open(&args.dir)?;
    let report = shared.index(records)?;
    write_output(None, &format!("{}\n", serde_json::to_string(&report)?))
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Index directory.
    #[arg(long, env = INDEX_DIR_ENV, value_name = "DIR")]
    pub dir: PathBuf,
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Origin allowed to call the API from a browser (repeatable; default any).
    #[arg(long = "allow-origin", value_name = "ORIGIN")]
    pub allow_origins: Vec<String>,
    /// Largest accepted request body in bytes.
    #[arg(long, default_value_t = DEFAULT_MAX_BODY_BYTES)]
    pub max_body_bytes: usize,
}

pub fn serve_cmd(args: &ServeArgs) -> Result<()> {
    let shared = Arc::new(SharedIndex::open(&args.dir)?);
    log::info!("{} pages loaded from {}", shared.snapshot().len(), args.dir.display());
    let options = ServerOptions {
        max_body_bytes: args.max_body_bytes,
        allow_origins: args.allow_origins.clone(),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(serve(args.addr, shared, options))?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Index directory.
    #[arg(long, env = INDEX_DIR_ENV, value_name = "DIR")]
    pub dir: PathBuf,
    /// Query JSON file, `-` for stdin.
    #[arg(long, value_name = "FILE")]
    pub query: PathBuf,
}

pub fn query(args: &QueryArgs) -> Result<()> {
    if !args.dir.join("manifest.json").exists() {
        bail!("{} is not an index directory", args.dir.display());
    }
    let index = Index::load(&args.dir)?;
    let query: Query = serde_json::from_str(&read_text(&args.query)?).context("parsing query")?;
    let result = index.execute(&query)?;
    write_output(None, &format!("{}\n", serde_json::to_string_pretty(&result)?))
}

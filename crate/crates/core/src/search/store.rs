use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{Index, IndexReport, PageRecord, Query, QueryError, SearchResult};

pub const INDEX_FORMAT: &str = "trowel-index/1";
const PAGES_FILE: &str = "pages.jsonl";
const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("record {index}: {message}")]
    Record { index: usize, message: String },
    #[error("index directory: {0}")]
    Format(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Page records from a JSON array or from JSON lines (blank lines skipped).
pub fn load_records(text: &str) -> Result<Vec<PageRecord>, StoreError> {
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text).map_err(|e| StoreError::Record {
            index: 0,
            message: e.to_string(),
        });
    }
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| StoreError::Record {
                index: i,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    pages: usize,
}

/// Writes to a sibling temp file and renames it over `path`.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(contents).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

impl Index {
    /// Persists the page records; the postings are rebuilt on load.
    pub fn save(&self, dir: &Path) -> Result<(), StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut pages = String::new();
        for rec in self.records() {
            pages.push_str(&serde_json::to_string(rec).expect("record serializes"));
            pages.push('\n');
        }
        write_atomic(&dir.join(PAGES_FILE), pages.as_bytes())?;
        let manifest = Manifest {
            format: INDEX_FORMAT.into(),
            pages: self.len(),
        };
        write_atomic(
            &dir.join(MANIFEST_FILE),
            serde_json::to_string_pretty(&manifest).expect("manifest serializes").as_bytes(),
        )
    }

    pub fn load(dir: &Path) -> Result<Index, StoreError> {
        let mpath = dir.join(MANIFEST_FILE);
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&mpath).map_err(io_err(&mpath))?)
            .map_err(|e| StoreError::Format(e.to_string()))?;
        if manifest.format != INDEX_FORMAT {
            return Err(StoreError::Format(format!("unsupported format `{}`", manifest.format)));
        }
        let ppath = dir.join(PAGES_FILE);
        let records = load_records(&fs::read_to_string(&ppath).map_err(io_err(&ppath))?)?;
        let mut index = Index::new();
        index
            .index_all(records)
            .map_err(|(index, message)| StoreError::Record { index, message })?;
        if index.len() != manifest.pages {
            return Err(StoreError::Format(format!(
                "manifest lists {} pages, found {}",
                manifest.pages,
                index.len()
            )));
        }
        Ok(index)
    }
}

/// An index shared between concurrent readers and one writer at a time.
///
/// Readers take a snapshot (`Arc<Index>`) and never see a partial update:
/// writers build a new index off to the side and swap it in.
#[derive(Debug, Default)]
pub struct SharedIndex {
    current: RwLock<Arc<Index>>,
    writer: Mutex<()>,
    dir: Option<PathBuf>,
}

impl SharedIndex {
    pub fn new(index: Index) -> Self {
        SharedIndex {
            current: RwLock::new(Arc::new(index)),
            writer: Mutex::new(()),
            dir: None,
        }
    }

    /// Opens (or starts) an index persisted in `dir`; every update is
    /// written back before it becomes visible.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        let index = if dir.join(MANIFEST_FILE).exists() {
            Index::load(dir)?
        } else {
            Index::new()
        };
        Ok(SharedIndex {
            dir: Some(dir.to_path_buf()),
            ..SharedIndex::new(index)
        })
    }

    pub fn snapshot(&self) -> Arc<Index> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn search(&self, query: &Query) -> Result<SearchResult, QueryError> {
        self.snapshot().execute(query)
    }

    /// Upserts `records` as one batch: either all become visible or none.
    pub fn index(&self, records: Vec<PageRecord>) -> Result<IndexReport, StoreError> {
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = (*self.snapshot()).clone();
        let report = next
            .index_all(records)
            .map_err(|(index, message)| StoreError::Record { index, message })?;
        if let Some(dir) = &self.dir {
            next.save(dir)?;
        }
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
        Ok(report)
    }
}

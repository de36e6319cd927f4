use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use super::geo::point_in_polygon;
use super::snippet::{snippet, SNIPPET_WIDTH};
use super::{FacetFilters, Hit, PageRecord, Query, QueryError, SearchResult};
use crate::corpus::EntityType;

type PageKey = (String, u32);

/// Lowercased alphanumeric runs; everything else separates terms.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

pub fn idf(df: usize, n_pages: usize) -> f64 {
    1.0 + (n_pages as f64 / (df as f64 + 1.0)).ln()
}

/// Contribution of one query term to a page's score.
pub fn term_score(tf: u32, df: usize, n_pages: usize, page_len: usize) -> f64 {
    if tf == 0 || page_len == 0 {
        return 0.0;
    }
    let i = idf(df, n_pages);
    (tf as f64).sqrt() * i * i / (page_len as f64).sqrt()
}

#[derive(Debug, Clone)]
struct StoredPage {
    record: PageRecord,
    len: usize,
    tf: HashMap<String, u32>,
    entity_sets: BTreeMap<EntityType, HashSet<String>>,
}

impl StoredPage {
    fn new(record: PageRecord) -> Self {
        let terms = tokenize(&record.text);
        let mut tf = HashMap::new();
        for t in &terms {
            *tf.entry(t.clone()).or_insert(0) += 1;
        }
        let entity_sets = record
            .entities
            .iter()
            .map(|(k, v)| (*k, v.iter().cloned().collect()))
            .collect();
        StoredPage {
            len: terms.len(),
            tf,
            entity_sets,
            record,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct IndexReport {
    pub indexed: usize,
    /// Records that replaced an existing page with the same key.
    pub replaced: usize,
    pub total_pages: usize,
}

/// In-memory page index.
#[derive(Debug, Clone, Default)]
pub struct Index {
    pages: BTreeMap<PageKey, StoredPage>,
    /// term -> pages containing it
    postings: HashMap<String, BTreeSet<PageKey>>,
}

impl Index {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pages.is_empty()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, BTreeSet::len)
    }

    pub fn page(&self, doc_id: &str, page_no: u32) -> Option<&PageRecord> {
        self.pages.get(&(doc_id.to_string(), page_no)).map(|p| &p.record)
    }

    pub fn records(&self) -> impl Iterator<Item = &PageRecord> {
        self.pages.values().map(|p| &p.record)
    }

    /// Validates and inserts a page, replacing any page with the same key.
    /// Returns whether a page was replaced.
    pub fn index_page(&mut self, record: PageRecord) -> Result<bool, String> {
        let record = record.validated()?;
        let key = record.key();
        let replaced = self.remove(&key);
        let page = StoredPage::new(record);
        for term in page.tf.keys() {
            self.postings.entry(term.clone()).or_default().insert(key.clone());
        }
        self.pages.insert(key, page);
        Ok(replaced)
    }

    /// Indexes every record or none: the first invalid record aborts.
    pub fn index_all(&mut self, records: Vec<PageRecord>) -> Result<IndexReport, (usize, String)> {
        let mut staged = self.clone();
        let mut report = IndexReport::default();
        for (i, rec) in records.into_iter().enumerate() {
            if staged.index_page(rec).map_err(|e| (i, e))? {
                report.replaced += 1;
            }
            report.indexed += 1;
        }
        *self = staged;
        report.total_pages = self.len();
        Ok(report)
    }

    pub fn remove_page(&mut self, doc_id: &str, page_no: u32) -> bool {
        self.remove(&(doc_id.to_string(), page_no))
    }

    fn remove(&mut self, key: &PageKey) -> bool {
        let Some(old) = self.pages.remove(key) else {
            return false;
        };
        for term in old.tf.keys() {
            if let Some(set) = self.postings.get_mut(term) {
                set.remove(key);
                if set.is_empty() {
                    self.postings.remove(term);
                }
            }
        }
        true
    }

    /// TF-IDF score of a stored page for `terms` (0 for unknown pages).
    pub fn score_page(&self, terms: &[String], doc_id: &str, page_no: u32) -> f64 {
        self.pages
            .get(&(doc_id.to_string(), page_no))
            .map_or(0.0, |p| self.score_stored(terms, p))
    }

    fn score_stored(&self, terms: &[String], page: &StoredPage) -> f64 {
        let n = self.pages.len();
        terms
            .iter()
            .map(|t| term_score(page.tf.get(t).copied().unwrap_or(0), self.document_frequency(t), n, page.len))
            .sum()
    }

    fn passes_filters(&self, query: &Query, page: &StoredPage) -> bool {
        for (etype, terms) in &query.entity_filters {
            let Some(set) = page.entity_sets.get(etype) else {
                if terms.is_empty() {
                    continue;
                }
                return false;
            };
            if !terms.iter().all(|t| set.contains(t)) {
                return false;
            }
        }
        if let Some(date) = &query.date {
            if !date.matches(&page.record.year_ranges) {
                return false;
            }
        }
        if let Some(FacetFilters { doc_type, subject }) = &query.facet_filters {
            let meta = &page.record.metadata;
            if doc_type.as_ref().is_some_and(|d| *d != meta.doc_type) || subject.as_ref().is_some_and(|s| *s != meta.subject) {
                return false;
            }
        }
        if let Some(poly) = &query.bbox_or_polygon {
            match page.record.metadata.coord {
                Some(c) if point_in_polygon(c, poly) => {}
                _ => return false,
            }
        }
        true
    }

    /// Runs a query. Invalid queries are rejected before any work.
    pub fn execute(&self, query: &Query) -> Result<SearchResult, QueryError> {
        let query = query.clone().validated()?;
        let terms = query.terms();
        let candidates: Box<dyn Iterator<Item = &StoredPage>> = if terms.is_empty() {
            Box::new(self.pages.values())
        } else {
            let mut keys = BTreeSet::new();
            for t in &terms {
                if let Some(set) = self.postings.get(t) {
                    keys.extend(set.iter());
                }
            }
            Box::new(keys.into_iter().map(|k| &self.pages[k]))
        };

        let mut doc_type: BTreeMap<String, u64> = BTreeMap::new();
        let mut subject: BTreeMap<String, u64> = BTreeMap::new();
        let mut scored = Vec::new();
        for page in candidates {
            if !self.passes_filters(&query, page) {
                continue;
            }
            let meta = &page.record.metadata;
            if !meta.doc_type.is_empty() {
                *doc_type.entry(meta.doc_type.clone()).or_default() += 1;
            }
            if !meta.subject.is_empty() {
                *subject.entry(meta.subject.clone()).or_default() += 1;
            }
            scored.push((self.score_stored(&terms, page), page));
        }
        scored.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then_with(|| a.1.record.doc_id.cmp(&b.1.record.doc_id))
                .then_with(|| a.1.record.page_no.cmp(&b.1.record.page_no))
        });
        let total = scored.len();
        let hits = scored
            .into_iter()
            .skip(query.page.from)
            .take(query.page.size)
            .map(|(score, page)| Hit {
                doc_id: page.record.doc_id.clone(),
                page_no: page.record.page_no,
                score,
                snippet: snippet(&page.record.text, &terms, SNIPPET_WIDTH),
            })
            .collect();
        let facets = BTreeMap::from([("doc_type".to_string(), doc_type), ("subject".to_string(), subject)]);
        Ok(SearchResult { total, hits, facets })
    }
}

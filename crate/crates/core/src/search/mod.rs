//! Page-level search with entity, date, facet and geo filters.
//!
//! The retrieval unit is a page. Filters are hard constraints; full-text
//! terms rank the survivors with a TF-IDF score and a length norm:
//!
//! `score = sum over query terms t in page of sqrt(tf) * idf(t)^2 / sqrt(len)`
//! with `idf(t) = 1 + ln(N / (df(t) + 1))`.
//!
//! Wire format (JSON): see [`PageRecord`], [`Query`] and [`SearchResult`].

mod geo;
mod index;
mod snippet;
mod store;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chrono::YearRange;
use crate::corpus::EntityType;

pub use geo::point_in_polygon;
pub use index::{idf, term_score, tokenize, Index, IndexReport};
pub use snippet::{snippet, SNIPPET_WIDTH};
pub use store::{load_records, SharedIndex, StoreError, INDEX_FORMAT};

/// Largest accepted `page.size`.
pub const MAX_PAGE_SIZE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PageMetadata {
    #[serde(default)]
    pub doc_type: String,
    #[serde(default)]
    pub subject: String,
    /// `[lon, lat]`.
    #[serde(default)]
    pub coord: Option<[f64; 2]>,
}

/// One indexable page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRecord {
    pub doc_id: String,
    /// 1-based.
    pub page_no: u32,
    pub text: String,
    /// Normalized entity surfaces per type.
    #[serde(default)]
    pub entities: BTreeMap<EntityType, Vec<String>>,
    /// `[start, end]` pairs, astronomical years.
    #[serde(default)]
    pub year_ranges: Vec<YearRange>,
    #[serde(default)]
    pub metadata: PageMetadata,
}

/// Lowercased and single-spaced, the form entity surfaces are stored in.
pub fn normalize_surface(s: &str) -> String {
    s.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

impl PageRecord {
    /// Checks the record and normalizes entity surfaces.
    pub fn validated(mut self) -> Result<Self, String> {
        if self.doc_id.trim().is_empty() {
            return Err("doc_id is empty".into());
        }
        if self.page_no == 0 {
            return Err(format!("{}: page_no must be at least 1", self.doc_id));
        }
        for (etype, surfaces) in &mut self.entities {
            for s in surfaces.iter_mut() {
                *s = normalize_surface(s);
                if s.is_empty() {
                    return Err(format!("{}#{}: empty {etype} entity", self.doc_id, self.page_no));
                }
            }
        }
        if let Some([lon, lat]) = self.metadata.coord {
            if !lon.is_finite() || !lat.is_finite() {
                return Err(format!("{}#{}: non-finite coordinate", self.doc_id, self.page_no));
            }
        }
        Ok(self)
    }

    pub fn key(&self) -> (String, u32) {
        (self.doc_id.clone(), self.page_no)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DateMode {
    /// Some page range covers the whole query interval.
    #[default]
    Contain,
    /// Some page range intersects the query interval.
    Overlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DateFilter {
    #[serde(default)]
    pub mode: DateMode,
    pub start: i64,
    pub end: i64,
}

impl DateFilter {
    pub fn matches(&self, ranges: &[YearRange]) -> bool {
        ranges.iter().any(|r| match self.mode {
            DateMode::Contain => r.start() <= self.start && r.end() >= self.end,
            DateMode::Overlap => r.start() <= self.end && r.end() >= self.start,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetFilters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageRequest {
    #[serde(default)]
    pub from: usize,
    #[serde(default = "default_size")]
    pub size: usize,
}

fn default_size() -> usize {
    10
}

impl Default for PageRequest {
    fn default() -> Self {
        PageRequest { from: 0, size: default_size() }
    }
}

/// A structured search request. Every field is optional; `{}` matches all
/// pages.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    /// Terms per entity type; all must be present on the page.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub entity_filters: BTreeMap<EntityType, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<DateFilter>,
    /// Pages must contain at least one of the terms; they also drive ranking.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fulltext: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facet_filters: Option<FacetFilters>,
    /// Polygon vertices as `[lon, lat]`; a bounding box is sent as four
    /// corners.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox_or_polygon: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub page: PageRequest,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct QueryError {
    pub code: &'static str,
    pub message: String,
}

impl QueryError {
    fn invalid(message: impl Into<String>) -> Self {
        QueryError {
            code: "invalid_query",
            message: message.into(),
        }
    }
}

impl Query {
    /// Rejects malformed queries and normalizes entity terms.
    pub fn validated(mut self) -> Result<Self, QueryError> {
        if self.page.size == 0 || self.page.size > MAX_PAGE_SIZE {
            return Err(QueryError::invalid(format!("page.size must be in 1..={MAX_PAGE_SIZE}")));
        }
        if let Some(d) = &self.date {
            if d.start > d.end {
                return Err(QueryError::invalid(format!("date.start {} is after date.end {}", d.start, d.end)));
            }
        }
        if let Some(poly) = &self.bbox_or_polygon {
            if poly.len() < 3 {
                return Err(QueryError::invalid("polygon needs at least 3 vertices"));
            }
            if poly.iter().flatten().any(|v| !v.is_finite()) {
                return Err(QueryError::invalid("polygon has a non-finite coordinate"));
            }
        }
        for (etype, terms) in &mut self.entity_filters {
            for t in terms.iter_mut() {
                *t = normalize_surface(t);
                if t.is_empty() {
                    return Err(QueryError::invalid(format!("empty {etype} filter term")));
                }
            }
        }
        Ok(self)
    }

    /// Distinct full-text terms in first-occurrence order.
    pub fn terms(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in self.fulltext.as_deref().map(tokenize).unwrap_or_default() {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub doc_id: String,
    pub page_no: u32,
    pub score: f64,
    pub snippet: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    /// Pages passing every filter.
    pub total: usize,
    pub hits: Vec<Hit>,
    /// `doc_type` and `subject` value counts over all matching pages.
    pub facets: BTreeMap<String, BTreeMap<String, u64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_wire_format() {
        let q: Query = serde_json::from_str(
            r#"{"entity_filters":{"ART":["Urn"],"CON":["cremation"]},
                "date":{"start":-2000,"end":-800},
                "fulltext":"upside down"}"#,
        )
        .unwrap();
        let q = q.validated().unwrap();
        assert_eq!(q.entity_filters[&EntityType::Artefact], vec!["urn"]);
        assert_eq!(q.date.unwrap().mode, DateMode::Contain);
        assert_eq!(q.page, PageRequest { from: 0, size: 10 });
        assert_eq!(q.terms(), vec!["upside", "down"]);
        let empty: Query = serde_json::from_str("{}").unwrap();
        assert_eq!(serde_json::to_string(&empty).unwrap(), r#"{"page":{"from":0,"size":10}}"#);
    }

    #[test]
    fn invalid_queries() {
        let bad = |s: &str| serde_json::from_str::<Query>(s).map_err(|_| ()).and_then(|q| q.validated().map_err(|_| ()));
        assert!(bad(r#"{"page":{"size":0}}"#).is_err());
        assert!(bad(r#"{"bbox_or_polygon":[[0,0],[1,1]]}"#).is_err());
        assert!(bad(r#"{"date":{"start":5,"end":1}}"#).is_err());
        assert!(bad(r#"{"entity_filters":{"LOC":["  "]}}"#).is_err());
        assert!(bad(r#"{"entity_filters":{"TOOL":["x"]}}"#).is_err());
        assert!(bad(r#"{"fulltext":"x","colour":"red"}"#).is_err());
        assert!(bad(r#"{"date":{"mode":"within","start":1,"end":2}}"#).is_err());
    }

    #[test]
    fn record_validation() {
        let rec: PageRecord = serde_json::from_str(
            r#"{"doc_id":"r1","page_no":2,"text":"x","entities":{"LOC":["  Swifterbant  Zuid "]},
                "year_ranges":[[-2100,-700]],"metadata":{"doc_type":"report","subject":"survey","coord":[5.6,52.5]}}"#,
        )
        .unwrap();
        let rec = rec.validated().unwrap();
        assert_eq!(rec.entities[&EntityType::Location], vec!["swifterbant zuid"]);
        assert_eq!(rec.year_ranges[0], YearRange::new(-2100, -700).unwrap());
        let zero: PageRecord = serde_json::from_str(r#"{"doc_id":"r1","page_no":0,"text":""}"#).unwrap();
        assert!(zero.validated().is_err());
        assert!(serde_json::from_str::<PageRecord>(r#"{"doc_id":"r","page_no":1,"text":"","year_ranges":[[5,1]]}"#).is_err());
    }

    #[test]
    fn date_modes() {
        let r = [YearRange::new(-2100, -700).unwrap()];
        let contain = DateFilter { mode: DateMode::Contain, start: -2000, end: -800 };
        assert!(contain.matches(&r));
        let wide = DateFilter { start: -2200, ..contain };
        assert!(!wide.matches(&r));
        assert!(DateFilter { mode: DateMode::Overlap, ..wide }.matches(&r));
        assert!(!DateFilter { mode: DateMode::Overlap, start: -600, end: 0 }.matches(&r));
        assert!(!contain.matches(&[]));
    }
}

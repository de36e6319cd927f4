//! Domain thesaurus lists and n-gram membership features.
//!
//! The thesaurus file is tab separated, one phrase per line:
//!
//! ```text
//! PERIOD	bronze age	-2000	-800
//! ARTEFACT	axe
//! MATERIAL	flint
//! ```
//!
//! `PERIOD` rows may carry a start and end year, which the [`crate::chrono`]
//! normalizer uses to resolve named periods. Blank lines and lines starting
//! with `#` are ignored.

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::chrono::YearRange;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ListName {
    Period,
    Artefact,
    Material,
}

impl ListName {
    pub const ALL: [ListName; 3] = [ListName::Period, ListName::Artefact, ListName::Material];

    pub fn as_str(self) -> &'static str {
        match self {
            ListName::Period => "PERIOD",
            ListName::Artefact => "ARTEFACT",
            ListName::Material => "MATERIAL",
        }
    }
}

impl fmt::Display for ListName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ListName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PERIOD" => Ok(ListName::Period),
            "ARTEFACT" => Ok(ListName::Artefact),
            "MATERIAL" => Ok(ListName::Material),
            other => Err(format!("unknown list `{other}`")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("thesaurus line {line}: {message}")]
pub struct ThesaurusError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Thesaurus {
    lists: BTreeMap<ListName, HashSet<Vec<String>>>,
    period_ranges: HashMap<String, YearRange>,
    max_phrase_len: usize,
}

/// Per-token list membership.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ListFlags {
    pub period: bool,
    pub artefact: bool,
    pub material: bool,
}

impl ListFlags {
    pub fn get(&self, list: ListName) -> bool {
        match list {
            ListName::Period => self.period,
            ListName::Artefact => self.artefact,
            ListName::Material => self.material,
        }
    }

    fn set(&mut self, list: ListName) {
        match list {
            ListName::Period => self.period = true,
            ListName::Artefact => self.artefact = true,
            ListName::Material => self.material = true,
        }
    }

    pub fn any(&self) -> bool {
        self.period || self.artefact || self.material
    }
}

fn phrase_tokens(phrase: &str) -> Vec<String> {
    phrase.split_whitespace().map(str::to_lowercase).collect()
}

/// Lowercased, single-spaced key for period lookups.
pub(crate) fn phrase_key(phrase: &str) -> String {
    phrase_tokens(phrase).join(" ")
}

impl Thesaurus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a phrase; returns `false` for a phrase without tokens.
    pub fn add_phrase(&mut self, list: ListName, phrase: &str) -> bool {
        let tokens = phrase_tokens(phrase);
        if tokens.is_empty() {
            return false;
        }
        self.max_phrase_len = self.max_phrase_len.max(tokens.len());
        self.lists.entry(list).or_default().insert(tokens);
        true
    }

    pub fn add_period(&mut self, phrase: &str, range: YearRange) -> bool {
        if !self.add_phrase(ListName::Period, phrase) {
            return false;
        }
        self.period_ranges.insert(phrase_key(phrase), range);
        true
    }

    pub fn contains(&self, list: ListName, phrase: &str) -> bool {
        self.lists
            .get(&list)
            .is_some_and(|set| set.contains(&phrase_tokens(phrase)))
    }

    pub fn phrase_count(&self, list: ListName) -> usize {
        self.lists.get(&list).map_or(0, HashSet::len)
    }

    /// Year range of a named period, matched case-insensitively.
    pub fn period_range(&self, phrase: &str) -> Option<YearRange> {
        self.period_ranges.get(&phrase_key(phrase)).copied()
    }

    /// Per-token membership flags for a sentence.
    ///
    /// A token is flagged for a list when it lies inside any contiguous,
    /// case-insensitive occurrence of one of the list's phrases. Multi-word
    /// phrases only match as a whole, so "Bronze" followed by "axe" is not a
    /// period even though "bronze age" is.
    pub fn membership_features(&self, sentence: &[&str]) -> Vec<ListFlags> {
        let lowered: Vec<String> = sentence.iter().map(|s| s.to_lowercase()).collect();
        let mut flags = vec![ListFlags::default(); lowered.len()];
        for (list, phrases) in &self.lists {
            for start in 0..lowered.len() {
                let longest = self.max_phrase_len.min(lowered.len() - start);
                for len in 1..=longest {
                    if phrases.contains(&lowered[start..start + len]) {
                        for f in &mut flags[start..start + len] {
                            f.set(*list);
                        }
                    }
                }
            }
        }
        flags
    }
}

pub fn load_thesaurus(text: &str) -> Result<Thesaurus, ThesaurusError> {
    let mut thesaurus = Thesaurus::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let err = |message: String| ThesaurusError { line, message };
        let cols: Vec<&str> = raw.split('\t').collect();
        let list: ListName = cols[0].trim().parse().map_err(err)?;
        let phrase = cols.get(1).copied().unwrap_or("");
        match cols.len() {
            2 => {
                if !thesaurus.add_phrase(list, phrase) {
                    return Err(err("empty phrase".into()));
                }
            }
            4 if list == ListName::Period => {
                let parse_year = |s: &str| {
                    s.trim()
                        .parse::<i64>()
                        .map_err(|_| err(format!("invalid year `{s}`")))
                };
                let start = parse_year(cols[2])?;
                let end = parse_year(cols[3])?;
                let range = YearRange::new(start, end)
                    .ok_or_else(|| err(format!("start {start} after end {end}")))?;
                if !thesaurus.add_period(phrase, range) {
                    return Err(err("empty phrase".into()));
                }
            }
            4 => return Err(err(format!("year range given for {list} phrase"))),
            n => return Err(err(format!("expected 2 or 4 columns, found {n}"))),
        }
    }
    Ok(thesaurus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bronze() -> Thesaurus {
        load_thesaurus("PERIOD\tbronze age\t-2000\t-800\nARTEFACT\taxe\n").unwrap()
    }

    #[test]
    fn period_row_with_range() {
        let t = bronze();
        assert!(t.contains(ListName::Period, "Bronze Age"));
        assert_eq!(t.period_range("BRONZE  age"), YearRange::new(-2000, -800));
        assert!(t.contains(ListName::Artefact, "axe"));
    }

    #[test]
    fn unknown_list_errors_with_line() {
        let err = load_thesaurus("ARTEFACT\taxe\nFOO\tx\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("FOO"));
    }

    #[test]
    fn malformed_rows() {
        assert!(load_thesaurus("PERIOD\tx\t-1\n").is_err());
        assert!(load_thesaurus("PERIOD\tx\tfoo\t3\n").is_err());
        assert!(load_thesaurus("PERIOD\tx\t10\t3\n").is_err());
        assert!(load_thesaurus("ARTEFACT\tx\t1\t3\n").is_err());
        assert!(load_thesaurus("ARTEFACT\t  \n").is_err());
    }

    #[test]
    fn duplicates_collapse() {
        let t = load_thesaurus("ARTEFACT\tAxe\nARTEFACT\taxe\n# comment\n\n").unwrap();
        assert_eq!(t.phrase_count(ListName::Artefact), 1);
    }

    #[test]
    fn multiword_phrase_needs_full_sequence() {
        let t = bronze();
        let f = t.membership_features(&["Bronze", "age"]);
        assert!(f[0].period && f[1].period);
        let f = t.membership_features(&["Bronze", "axe"]);
        assert!(!f[0].period);
        assert!(f[1].artefact && !f[1].period);
    }

    #[test]
    fn absent_token_all_false() {
        let f = bronze().membership_features(&["hond"]);
        assert_eq!(f, vec![ListFlags::default()]);
    }

    #[test]
    fn overlapping_phrases() {
        let mut t = Thesaurus::new();
        t.add_phrase(ListName::Period, "late bronze");
        t.add_phrase(ListName::Period, "bronze age");
        let f = t.membership_features(&["late", "bronze", "age"]);
        assert!(f.iter().all(|x| x.period));
        let f = t.membership_features(&["late", "iron", "age"]);
        assert!(f.iter().all(|x| !x.period));
    }

    fn brute_force(phrases: &[(ListName, Vec<String>)], sentence: &[String]) -> Vec<ListFlags> {
        let mut out = vec![ListFlags::default(); sentence.len()];
        for (list, phrase) in phrases {
            let n = phrase.len();
            if n == 0 || n > sentence.len() {
                continue;
            }
            for start in 0..=sentence.len() - n {
                let hit = (0..n).all(|j| sentence[start + j].to_lowercase() == phrase[j].to_lowercase());
                if hit {
                    for f in &mut out[start..start + n] {
                        f.set(*list);
                    }
                }
            }
        }
        out
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["a", "B", "c", "A", "b", "d"]).prop_map(String::from)
    }

    fn list() -> impl Strategy<Value = ListName> {
        prop::sample::select(ListName::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            phrases in prop::collection::vec((list(), prop::collection::vec(word(), 1..4)), 0..6),
            sentence in prop::collection::vec(word(), 0..10),
        ) {
            let mut t = Thesaurus::new();
            for (l, p) in &phrases {
                t.add_phrase(*l, &p.join(" "));
            }
            let refs: Vec<&str> = sentence.iter().map(String::as_str).collect();
            prop_assert_eq!(t.membership_features(&refs), brute_force(&phrases, &sentence));
        }

        #[test]
        fn case_insensitive(
            phrases in prop::collection::vec((list(), prop::collection::vec(word(), 1..3)), 1..5),
            sentence in prop::collection::vec(word(), 1..8),
            flips in prop::collection::vec(any::<bool>(), 8),
        ) {
            let mut t = Thesaurus::new();
            for (l, p) in &phrases {
                t.add_phrase(*l, &p.join(" "));
            }
            let flipped: Vec<String> = sentence
                .iter()
                .zip(&flips)
                .map(|(w, f)| if *f { w.to_uppercase() } else { w.to_lowercase() })
                .collect();
            let a: Vec<&str> = sentence.iter().map(String::as_str).collect();
            let b: Vec<&str> = flipped.iter().map(String::as_str).collect();
            prop_assert_eq!(t.membership_features(&a), t.membership_features(&b));
        }
    }
}

//! Period expression normalization and year statistics.
//!
//! Years are astronomical integers: negative values are BCE, there is no
//! special handling of year zero.

use std::collections::{BTreeMap, HashMap};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::EntityType;
use crate::gazetteer::Thesaurus;
use crate::pipeline::EntitySpan;

/// Radiocarbon "present".
pub const BP_ZERO: i64 = 1950;
/// Histogram years below this are dropped.
pub const HISTOGRAM_FLOOR: i64 = -10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct YearRange {
    start: i64,
    end: i64,
}

impl YearRange {
    /// `None` when `start > end`.
    pub fn new(start: i64, end: i64) -> Option<Self> {
        (start <= end).then_some(YearRange { start, end })
    }

    pub fn year(year: i64) -> Self {
        YearRange {
            start: year,
            end: year,
        }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.end
    }

    pub fn contains_range(&self, other: &YearRange) -> bool {
        self.start <= other.start && self.end >= other.end
    }

    pub fn overlaps(&self, other: &YearRange) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl TryFrom<(i64, i64)> for YearRange {
    type Error = String;

    fn try_from((start, end): (i64, i64)) -> Result<Self, Self::Error> {
        YearRange::new(start, end).ok_or_else(|| format!("year range start {start} after end {end}"))
    }
}

impl From<YearRange> for (i64, i64) {
    fn from(r: YearRange) -> Self {
        (r.start, r.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Era {
    Before,
    After,
    BeforePresent,
}

impl Era {
    fn parse(text: &str) -> Option<Era> {
        let compact: String = text.chars().filter(|c| c.is_alphanumeric()).collect();
        match compact.as_str() {
            "bce" | "bc" | "vchr" => Some(Era::Before),
            "ce" | "ad" | "nchr" => Some(Era::After),
            "bp" => Some(Era::BeforePresent),
            _ => None,
        }
    }

    fn to_year(self, n: i64) -> i64 {
        match self {
            Era::Before => -n,
            Era::After => n,
            Era::BeforePresent => BP_ZERO - n,
        }
    }
}

const NUM: &str = r"\d{1,3}(?:[.,]\d{3})+|\d+";
const ERA: &str = r"bce|bc|b\.\s*c\.?|ce|ad|a\.\s*d\.?|v\s*\.?\s*chr\s*\.?|n\s*\.?\s*chr\s*\.?|bp";

static SINGLE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"^(?P<n>{NUM})\s*(?P<era>{ERA})$")).unwrap());

static RANGE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"^(?P<a>{NUM})\s*(?P<era_a>{ERA})?\s*(?:-|–|—|to|tot)\s*(?P<b>{NUM})\s*(?P<era_b>{ERA})?$"
    ))
    .unwrap()
});

static CENTURY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"^(?:(?P<modifier>start|beginning|begin|early|vroege?|end|eind|late|laat|mid|middle|midden)(?:\s+of)?(?:\s+the)?[\s-]+)?(?P<k>\d+)\s*(?:st|nd|rd|th|ste|de|e)?\s+(?:century|eeuw)(?:\s+(?P<era>{ERA}))?$"
    ))
    .unwrap()
});

fn parse_number(text: &str) -> Option<i64> {
    let digits: String = text.chars().filter(char::is_ascii_digit).collect();
    digits.parse().ok()
}

fn clean(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Whole,
    FirstQuarter,
    LastQuarter,
    MiddleHalf,
}

fn century_range(k: i64, era: Era, part: Part) -> Option<YearRange> {
    if k < 1 {
        return None;
    }
    let (start, end) = match era {
        Era::After => (100 * (k - 1), 100 * k),
        Era::Before => (-100 * k, -100 * (k - 1)),
        Era::BeforePresent => return None,
    };
    let (start, end) = match part {
        Part::Whole => (start, end),
        Part::FirstQuarter => (start, start + 25),
        Part::LastQuarter => (end - 25, end),
        Part::MiddleHalf => (start + 25, end - 25),
    };
    YearRange::new(start, end)
}

/// Resolves a period mention to a year range.
///
/// Tried in order: a named period from the thesaurus, `<n> <era>`,
/// `<a> - <b> <era>`, and ordinal centuries with optional start/mid/end
/// modifiers. Bare numbers and numeric ranges without an era are rejected
/// since they are more often measurements than dates.
pub fn normalize(text: &str, thesaurus: Option<&Thesaurus>) -> Option<YearRange> {
    let text = clean(text);
    if text.is_empty() {
        return None;
    }
    if let Some(range) = thesaurus.and_then(|t| t.period_range(&text)) {
        return Some(range);
    }
    if let Some(caps) = SINGLE.captures(&text) {
        let n = parse_number(&caps["n"])?;
        let year = Era::parse(&caps["era"])?.to_year(n);
        return Some(YearRange::year(year));
    }
    if let Some(caps) = RANGE.captures(&text) {
        let era = caps
            .name("era_b")
            .or_else(|| caps.name("era_a"))
            .and_then(|m| Era::parse(m.as_str()));
        let Some(era) = era else {
            log::debug!("numeric range without era rejected: {text:?}");
            return None;
        };
        let era_a = caps.name("era_a").and_then(|m| Era::parse(m.as_str())).unwrap_or(era);
        let a = era_a.to_year(parse_number(&caps["a"])?);
        let b = era.to_year(parse_number(&caps["b"])?);
        return YearRange::new(a.min(b), a.max(b));
    }
    if let Some(caps) = CENTURY.captures(&text) {
        let k = parse_number(&caps["k"])?;
        let era = match caps.name("era") {
            Some(m) => Era::parse(m.as_str())?,
            None => Era::After,
        };
        let part = match caps.name("modifier").map(|m| m.as_str()) {
            None => Part::Whole,
            Some("start" | "beginning" | "begin" | "early" | "vroeg" | "vroege") => Part::FirstQuarter,
            Some("end" | "eind" | "late" | "laat") => Part::LastQuarter,
            Some(_) => Part::MiddleHalf,
        };
        return century_range(k, era, part);
    }
    log::debug!("unparseable period expression: {text:?}");
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YearHistogram {
    pub counts: BTreeMap<i64, u64>,
    pub floor_year: i64,
}

impl YearHistogram {
    pub fn total_mass(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `year,count` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("year,count\n");
        for (year, count) in &self.counts {
            out.push_str(&format!("{year},{count}\n"));
        }
        out
    }
}

/// Counts, for every year, how many ranges cover it.
pub fn year_histogram(ranges: &[YearRange]) -> YearHistogram {
    let mut counts = BTreeMap::new();
    for range in ranges {
        let start = range.start.max(HISTOGRAM_FLOOR);
        for year in start..=range.end {
            *counts.entry(year).or_insert(0) += 1;
        }
    }
    YearHistogram {
        counts,
        floor_year: HISTOGRAM_FLOOR,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EntityTypeStats {
    pub total: usize,
    pub unique: usize,
    /// Most frequent surfaces, ties broken alphabetically.
    pub top: Vec<(String, usize)>,
}

pub const TOP_SURFACES: usize = 5;

/// Totals, distinct surfaces and the most frequent surfaces per entity type.
/// Every type is present in the result, with zeros when it never occurs.
pub fn entity_stats(spans: &[EntitySpan]) -> BTreeMap<EntityType, EntityTypeStats> {
    let mut freq: BTreeMap<EntityType, HashMap<&str, usize>> = BTreeMap::new();
    for span in spans {
        *freq.entry(span.etype).or_default().entry(&span.surface).or_default() += 1;
    }
    EntityType::ALL
        .iter()
        .map(|&etype| {
            let counts = freq.remove(&etype).unwrap_or_default();
            let mut ranked: Vec<(String, usize)> =
                counts.iter().map(|(s, c)| (s.to_string(), *c)).collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            ranked.truncate(TOP_SURFACES);
            let stats = EntityTypeStats {
                total: counts.values().sum(),
                unique: counts.len(),
                top: ranked,
            };
            (etype, stats)
        })
        .collect()
}

/// Renders [`entity_stats`] output as `entity,total,unique,top5` CSV, with
/// the top surfaces joined by `"; "`.
pub fn entity_stats_csv(stats: &BTreeMap<EntityType, EntityTypeStats>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["entity", "total", "unique", "top5"])
        .expect("in-memory write");
    let mut total = 0;
    let mut unique = 0;
    for (etype, s) in stats {
        let top: Vec<&str> = s.top.iter().map(|(name, _)| name.as_str()).collect();
        writer
            .write_record([
                etype.display_name(),
                &s.total.to_string(),
                &s.unique.to_string(),
                &top.join("; "),
            ])
            .expect("in-memory write");
        total += s.total;
        unique += s.unique;
    }
    writer
        .write_record(["Total", &total.to_string(), &unique.to_string(), ""])
        .expect("in-memory write");
    String::from_utf8(writer.into_inner().expect("in-memory write")).expect("utf-8 csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gazetteer::load_thesaurus;
    use proptest::prelude::*;

    fn yr(a: i64, b: i64) -> Option<YearRange> {
        YearRange::new(a, b)
    }

    #[test]
    fn single_years() {
        assert_eq!(normalize("600 CE", None), yr(600, 600));
        assert_eq!(normalize("100 BCE", None), yr(-100, -100));
        assert_eq!(normalize("1400 BP", None), yr(550, 550));
        assert_eq!(normalize("50 v. Chr.", None), yr(-50, -50));
        assert_eq!(normalize("1200 n.Chr.", None), yr(1200, 1200));
        assert_eq!(normalize("10.000 BC", None), yr(-10000, -10000));
        assert_eq!(normalize("AD", None), None);
        assert_eq!(normalize("600", None), None);
    }

    #[test]
    fn centuries() {
        assert_eq!(normalize("10th century", None), yr(900, 1000));
        assert_eq!(normalize("start of 10th century", None), yr(900, 925));
        assert_eq!(normalize("start of the 9th century", None), yr(800, 825));
        assert_eq!(normalize("end of the 9th century", None), yr(875, 900));
        assert_eq!(normalize("mid-10th century", None), yr(925, 975));
        assert_eq!(normalize("1st century BC", None), yr(-100, 0));
        assert_eq!(normalize("early 5th century BCE", None), yr(-500, -475));
        assert_eq!(normalize("begin 10e eeuw", None), yr(900, 925));
        assert_eq!(normalize("eind 3de eeuw n.Chr.", None), yr(275, 300));
        assert_eq!(normalize("0th century", None), None);
        assert_eq!(normalize("3rd century BP", None), None);
    }

    #[test]
    fn ranges() {
        assert_eq!(normalize("150 - 210", None), None);
        assert_eq!(normalize("150 - 210 AD", None), yr(150, 210));
        assert_eq!(normalize("800 - 500 BC", None), yr(-800, -500));
        assert_eq!(normalize("100 BCE - 50 CE", None), yr(-100, 50));
        assert_eq!(normalize("3000 tot 2500 BP", None), yr(-1050, -550));
    }

    #[test]
    fn named_periods_from_thesaurus() {
        let t = load_thesaurus("PERIOD\tbronze age\t-2000\t-800\n").unwrap();
        assert_eq!(normalize("Bronze  Age", Some(&t)), yr(-2000, -800));
        assert_eq!(normalize("bronze age", None), None);
        assert_eq!(normalize("iron age", Some(&t)), None);
    }

    #[test]
    fn histogram_definition() {
        let h = year_histogram(&[yr(0, 2).unwrap(), yr(1, 3).unwrap()]);
        let expected: BTreeMap<i64, u64> = [(0, 1), (1, 2), (2, 2), (3, 1)].into();
        assert_eq!(h.counts, expected);
        assert!(year_histogram(&[]).counts.is_empty());
        let h = year_histogram(&[yr(-12000, -9000).unwrap()]);
        assert_eq!(*h.counts.keys().next().unwrap(), -10000);
        assert_eq!(*h.counts.keys().last().unwrap(), -9000);
        assert_eq!(h.counts.len(), 1001);
        assert!(h.to_csv().starts_with("year,count\n-10000,1\n"));
    }

    fn span(etype: EntityType, s: &str) -> EntitySpan {
        EntitySpan {
            etype,
            start: 0,
            end: 1,
            surface: s.into(),
        }
    }

    #[test]
    fn stats_ranking() {
        let spans = vec![
            span(EntityType::Context, "pit"),
            span(EntityType::Context, "ditch"),
            span(EntityType::Context, "pit"),
            span(EntityType::Context, "pit"),
        ];
        let stats = entity_stats(&spans);
        let con = &stats[&EntityType::Context];
        assert_eq!(con.total, 4);
        assert_eq!(con.unique, 2);
        assert_eq!(con.top, vec![("pit".into(), 3), ("ditch".into(), 1)]);
        assert_eq!(stats[&EntityType::Artefact], EntityTypeStats::default());
    }

    #[test]
    fn stats_empty() {
        let stats = entity_stats(&[]);
        assert_eq!(stats.len(), 6);
        assert!(stats.values().all(|s| s.total == 0 && s.unique == 0 && s.top.is_empty()));
        let csv = entity_stats_csv(&stats);
        assert!(csv.starts_with("entity,total,unique,top5\n"));
        assert!(csv.ends_with("Total,0,0,\n"));
    }

    #[test]
    fn stats_match_recount() {
        let words = ["pit", "ditch", "well", "house", "posthole", "kuil", "greppel"];
        let mut spans = Vec::new();
        for i in 0..200usize {
            let etype = EntityType::ALL[i * 7 % 6];
            spans.push(span(etype, words[(i * i + 3 * i) % words.len()]));
        }
        let stats = entity_stats(&spans);
        for etype in EntityType::ALL {
            let mine: Vec<&str> = spans.iter().filter(|s| s.etype == etype).map(|s| s.surface.as_str()).collect();
            let s = &stats[&etype];
            assert_eq!(s.total, mine.len());
            let mut distinct = mine.clone();
            distinct.sort();
            distinct.dedup();
            assert_eq!(s.unique, distinct.len());
            for (name, count) in &s.top {
                assert_eq!(*count, mine.iter().filter(|m| *m == name).count());
            }
            // nothing outside the top list is more frequent than its last entry
            if let Some((_, last)) = s.top.last() {
                for d in &distinct {
                    if !s.top.iter().any(|(n, _)| n == d) {
                        assert!(mine.iter().filter(|m| *m == d).count() <= *last);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn bp_arithmetic(n in 0i64..100_000) {
            prop_assert_eq!(normalize(&format!("{n} BP"), None), YearRange::new(1950 - n, 1950 - n));
        }

        #[test]
        fn first_quarter_width(k in 1i64..40, bce in any::<bool>()) {
            let text = format!("start of {k}th century{}", if bce { " BCE" } else { "" });
            let r = normalize(&text, None).unwrap();
            prop_assert_eq!(r.end() - r.start(), 25);
        }

        #[test]
        fn output_is_ordered(text in "[0-9a-z .-]{0,24}") {
            if let Some(r) = normalize(&text, None) {
                prop_assert!(r.start() <= r.end());
            }
            prop_assert_eq!(normalize(&text, None), normalize(&text, None));
        }

        #[test]
        fn histogram_mass(ranges in prop::collection::vec((-10_300i64..3000, 0i64..400), 0..8)) {
            let ranges: Vec<YearRange> = ranges.iter().map(|&(s, w)| YearRange::new(s, s + w).unwrap()).collect();
            let h = year_histogram(&ranges);
            let expected: i64 = ranges
                .iter()
                .map(|r| (r.end() - r.start().max(HISTOGRAM_FLOOR) + 1).max(0))
                .sum();
            prop_assert_eq!(h.total_mass() as i64, expected);
        }
    }
}

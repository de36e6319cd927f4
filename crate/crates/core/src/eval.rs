//! Token-level evaluation.
//!
//! Micro scores count only non-O decisions: precision is over tokens
//! predicted as an entity label, recall over tokens whose gold label is an
//! entity label, and a hit requires the exact label.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::BioLabel;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("gold has {gold} labels but prediction has {pred}")]
    ShapeMismatch { gold: usize, pred: usize },
    #[error("no runs to summarize")]
    NoRuns,
    #[error("need at least {needed} prediction sets, got {got}")]
    TooFewSystems { needed: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    fn from_counts(hits: u64, predicted: u64, actual: u64) -> Self {
        let ratio = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(hits, predicted);
        let recall = ratio(hits, actual);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LabelScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences of the label.
    pub support: u64,
}

/// Rows are gold labels, columns predicted, both in `BioLabel::ALL` order.
pub type Confusion = [[u64; 13]; 13];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub micro: Prf,
    /// Unweighted mean over the twelve entity labels.
    pub macro_avg: Prf,
    pub per_label: BTreeMap<BioLabel, LabelScore>,
    pub confusion: Confusion,
}

impl EvalReport {
    pub fn token_count(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.token_count();
        if total == 0 {
            return 0.0;
        }
        let diag: u64 = (0..13).map(|i| self.confusion[i][i]).sum();
        diag as f64 / total as f64
    }

    pub fn per_label_csv(&self) -> String {
        let mut out = String::from("label,precision,recall,f1,support\n");
        for (label, s) in &self.per_label {
            let _ = writeln!(out, "{label},{:.4},{:.4},{:.4},{}", s.precision, s.recall, s.f1, s.support);
        }
        let m = &self.macro_avg;
        let _ = writeln!(out, "macro,{:.4},{:.4},{:.4},", m.precision, m.recall, m.f1);
        let m = &self.micro;
        let _ = writeln!(out, "micro,{:.4},{:.4},{:.4},", m.precision, m.recall, m.f1);
        out
    }

    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for l in BioLabel::ALL {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (i, row) in self.confusion.iter().enumerate() {
            out.push_str(&BioLabel::ALL[i].to_string());
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "micro P {:.3} R {:.3} F1 {:.3}\nmacro P {:.3} R {:.3} F1 {:.3}\ntokens {} accuracy {:.3}\n",
            self.micro.precision,
            self.micro.recall,
            self.micro.f1,
            self.macro_avg.precision,
            self.macro_avg.recall,
            self.macro_avg.f1,
            self.token_count(),
            self.accuracy()
        )
    }
}

fn check_len(gold: usize, pred: usize) -> Result<(), EvalError> {
    if gold == pred {
        Ok(())
    } else {
        Err(EvalError::ShapeMismatch { gold, pred })
    }
}

pub fn score_flat(gold: &[BioLabel], pred: &[BioLabel]) -> Result<EvalReport, EvalError> {
    check_len(gold.len(), pred.len())?;
    let mut confusion = [[0u64; 13]; 13];
    for (g, p) in gold.iter().zip(pred) {
        confusion[g.index()][p.index()] += 1;
    }
    let o = BioLabel::O.index();
    let (mut hits, mut predicted, mut actual) = (0, 0, 0);
    let mut per_label = BTreeMap::new();
    let mut macro_sum = (0.0, 0.0, 0.0);
    for label in BioLabel::ALL.iter().filter(|l| !l.is_outside()) {
        let i = label.index();
        let tp = confusion[i][i];
        let col: u64 = (0..13).map(|r| confusion[r][i]).sum();
        let row: u64 = confusion[i].iter().sum();
        hits += tp;
        predicted += col;
        actual += row;
        let prf = Prf::from_counts(tp, col, row);
        macro_sum.0 += prf.precision;
        macro_sum.1 += prf.recall;
        macro_sum.2 += prf.f1;
        per_label.insert(
            *label,
            LabelScore {
                precision: prf.precision,
                recall: prf.recall,
                f1: prf.f1,
                support: row,
            },
        );
    }
    debug_assert_eq!(predicted + (0..13).map(|r| confusion[r][o]).sum::<u64>(), gold.len() as u64);
    let n = per_label.len() as f64;
    Ok(EvalReport {
        micro: Prf::from_counts(hits, predicted, actual),
        macro_avg: Prf {
            precision: macro_sum.0 / n,
            recall: macro_sum.1 / n,
            f1: macro_sum.2 / n,
        },
        per_label,
        confusion,
    })
}

/// Scores sentence-structured labels; sentence boundaries do not matter.
pub fn score(gold: &[Vec<BioLabel>], pred: &[Vec<BioLabel>]) -> Result<EvalReport, EvalError> {
    check_len(gold.len(), pred.len())?;
    for (g, p) in gold.iter().zip(pred) {
        check_len(g.len(), p.len())?;
    }
    score_flat(&gold.concat(), &pred.concat())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StdKind {
    /// Divide by n.
    #[default]
    Population,
    /// Divide by n - 1 (zero for a single run).
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub f1s: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Runs whose F1 is exactly zero.
    pub fail_count: usize,
}

pub fn run_stats(f1s: &[f64], kind: StdKind) -> Result<RunStats, EvalError> {
    if f1s.is_empty() {
        return Err(EvalError::NoRuns);
    }
    let n = f1s.len() as f64;
    let mean = f1s.iter().sum::<f64>() / n;
    let ss: f64 = f1s.iter().map(|v| (v - mean).powi(2)).sum();
    let denom = match kind {
        StdKind::Population => n,
        StdKind::Sample => (n - 1.0).max(1.0),
    };
    Ok(RunStats {
        f1s: f1s.to_vec(),
        mean,
        std: (ss / denom).sqrt(),
        fail_count: f1s.iter().filter(|&&v| v == 0.0).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McNemarResult {
    /// Tokens system A gets right and B gets wrong.
    pub b: u64,
    /// Tokens system A gets wrong and B gets right.
    pub c: u64,
    pub chi2: f64,
}

pub fn mcnemar_counts(b: u64, c: u64, continuity: bool) -> McNemarResult {
    let chi2 = if b + c == 0 {
        0.0
    } else {
        let diff = b.abs_diff(c) as f64;
        let num = if continuity { (diff - 1.0).max(0.0) } else { diff };
        num * num / (b + c) as f64
    };
    McNemarResult { b, c, chi2 }
}

/// McNemar's test on per-token correctness. `continuity` applies the
/// `(|b - c| - 1)^2` correction.
pub fn mcnemar(gold: &[BioLabel], a: &[BioLabel], b: &[BioLabel], continuity: bool) -> Result<McNemarResult, EvalError> {
    check_len(gold.len(), a.len())?;
    check_len(gold.len(), b.len())?;
    let (mut nb, mut nc) = (0, 0);
    for ((g, pa), pb) in gold.iter().zip(a).zip(b) {
        match (pa == g, pb == g) {
            (true, false) => nb += 1,
            (false, true) => nc += 1,
            _ => {}
        }
    }
    Ok(mcnemar_counts(nb, nc, continuity))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorCombination {
    pub count: u64,
    pub gold: BioLabel,
    pub preds: Vec<BioLabel>,
}

/// Tuples `(gold, pred_1..pred_k)` where some but not all systems are right,
/// most frequent first; ties by tuple order.
pub fn error_combinations(
    gold: &[BioLabel],
    preds: &[&[BioLabel]],
    top_n: usize,
) -> Result<Vec<ErrorCombination>, EvalError> {
    if preds.len() < 2 {
        return Err(EvalError::TooFewSystems {
            needed: 2,
            got: preds.len(),
        });
    }
    for p in preds {
        check_len(gold.len(), p.len())?;
    }
    let mut counts: BTreeMap<(BioLabel, Vec<BioLabel>), u64> = BTreeMap::new();
    for (i, &g) in gold.iter().enumerate() {
        let row: Vec<BioLabel> = preds.iter().map(|p| p[i]).collect();
        let right = row.iter().filter(|&&p| p == g).count();
        if right > 0 && right < row.len() {
            *counts.entry((g, row)).or_default() += 1;
        }
    }
    let mut ranked: Vec<ErrorCombination> = counts
        .into_iter()
        .map(|((gold, preds), count)| ErrorCombination { count, gold, preds })
        .collect();
    // stable sort keeps the map's tuple order among equal counts
    ranked.sort_by_key(|r| std::cmp::Reverse(r.count));
    ranked.truncate(top_n);
    Ok(ranked)
}

pub fn error_combinations_csv(rows: &[ErrorCombination], system_names: &[&str]) -> String {
    let mut out = String::from("count,true");
    for name in system_names {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{},{}", row.count, row.gold);
        for p in &row.preds {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
    }
    out
}

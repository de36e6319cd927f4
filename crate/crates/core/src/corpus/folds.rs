use std::collections::BTreeMap;

use super::{CorpusError, TaggedDocument};

/// Document-level assignment of a corpus to `k` cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub k: usize,
    pub fold_of_doc: BTreeMap<String, usize>,
}

impl FoldSplit {
    pub fn fold_of(&self, doc_id: &str) -> Option<usize> {
        self.fold_of_doc.get(doc_id).copied()
    }

    /// Token totals per fold.
    pub fn fold_sums(&self, docs: &[TaggedDocument]) -> Vec<usize> {
        let mut sums = vec![0; self.k];
        for doc in docs {
            if let Some(f) = self.fold_of(&doc.doc_id) {
                sums[f] += doc.token_count();
            }
        }
        sums
    }

    /// Splits `docs` into (train, test) for fold `fold`. Documents missing
    /// from the split are left out of both.
    pub fn partition<'a>(
        &self,
        docs: &'a [TaggedDocument],
        fold: usize,
    ) -> (Vec<&'a TaggedDocument>, Vec<&'a TaggedDocument>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for doc in docs {
            match self.fold_of(&doc.doc_id) {
                Some(f) if f == fold => test.push(doc),
                Some(_) => train.push(doc),
                None => {}
            }
        }
        (train, test)
    }

    /// `doc_id,fold` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("doc_id,fold\n");
        for (doc, fold) in &self.fold_of_doc {
            out.push_str(&format!("{doc},{fold}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, CorpusError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut fold_of_doc = BTreeMap::new();
        for record in reader.records() {
            let record = record.map_err(|e| CorpusError::FoldFile(e.to_string()))?;
            let doc = record.get(0).ok_or_else(|| CorpusError::FoldFile("missing doc_id".into()))?;
            let fold: usize = record
                .get(1)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| CorpusError::FoldFile(format!("bad fold for `{doc}`")))?;
            if fold_of_doc.insert(doc.to_string(), fold).is_some() {
                return Err(CorpusError::DuplicateDocId(doc.to_string()));
            }
        }
        let k = fold_of_doc.values().max().map_or(0, |m| m + 1);
        Ok(FoldSplit { k, fold_of_doc })
    }
}

/// Assigns whole documents to `k` folds with roughly equal token totals.
///
/// Longest-processing-time greedy: documents are visited by decreasing
/// token count (ties by ascending id) and each goes to the currently
/// lightest fold (ties to the lowest fold index).
pub fn make_folds(docs: &[TaggedDocument], k: usize) -> Result<FoldSplit, CorpusError> {
    if k < 2 {
        return Err(CorpusError::InvalidFoldCount(k));
    }
    if docs.len() < k {
        return Err(CorpusError::TooFewDocuments { docs: docs.len(), k });
    }
    let mut order: Vec<(usize, &str)> = docs
        .iter()
        .map(|d| (d.token_count(), d.doc_id.as_str()))
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));

    let mut sums = vec![0usize; k];
    let mut fold_of_doc = BTreeMap::new();
    for (count, id) in order {
        let lightest = (0..k).min_by_key(|&f| (sums[f], f)).unwrap();
        sums[lightest] += count;
        if fold_of_doc.insert(id.to_string(), lightest).is_some() {
            return Err(CorpusError::DuplicateDocId(id.to_string()));
        }
    }
    Ok(FoldSplit { k, fold_of_doc })
}

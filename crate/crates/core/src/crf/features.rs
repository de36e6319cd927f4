use std::collections::HashMap;

/// Sorted, de-duplicated ids of the binary features active at one position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FeatureVector(Vec<u32>);

impl FeatureVector {
    pub fn new(ids: impl IntoIterator<Item = u32>) -> Self {
        let mut ids: Vec<u32> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        FeatureVector(ids)
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Bidirectional map between feature names and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureTable {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl FeatureTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// A table of `n` placeholder names `f0..f{n-1}`.
    pub fn anonymous(n: usize) -> Self {
        let mut table = Self::new();
        for i in 0..n {
            table.intern(&format!("f{i}"));
        }
        table
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = u32::try_from(self.names.len()).expect("feature table overflow");
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

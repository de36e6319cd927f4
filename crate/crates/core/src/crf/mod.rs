//! Linear-chain conditional random field.
//!
//! Observation features are binary and conjoined with the output label;
//! transitions are label bigrams plus a distinguished START row for the
//! first position. All inference runs in log space.
//!
//! Parameters are kept in one flat vector: `n_features * n_labels` state
//! weights (feature-major) followed by `(n_labels + 1) * n_labels`
//! transition weights, the last row of which is START.

mod features;
mod inference;
mod io;
pub mod optim;
mod train;

use serde::{Deserialize, Serialize};

use crate::corpus::BioLabel;

pub use features::{FeatureTable, FeatureVector};
pub use inference::LogPotentials;
pub use io::MODEL_FORMAT;
pub use train::{default_grid, train, train_with_trace, tune_c1_c2, TrainTrace, TrainingSet};

#[derive(Debug, thiserror::Error)]
pub enum CrfError {
    #[error("label {0} is not in the model label set")]
    UnknownLabel(BioLabel),
    #[error("feature id {id} out of range for {n_features} features")]
    UnknownFeature { id: u32, n_features: usize },
    #[error("sequence has {features} feature positions but {labels} labels")]
    ShapeMismatch { features: usize, labels: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("regularization coefficients must be finite and non-negative (c1={c1}, c2={c2})")]
    InvalidHyperparams { c1: f64, c2: f64 },
    #[error("training diverged: non-finite objective {value} at iteration {iteration}")]
    NonFinite { iteration: usize, value: f64 },
    #[error("weight vector has {found} entries, expected {expected}")]
    WeightLength { expected: usize, found: usize },
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrfHyperparams {
    /// L1 coefficient; values above zero switch training to OWL-QN.
    pub c1: f64,
    /// L2 coefficient; the objective carries `c2 * ||w||^2`.
    pub c2: f64,
    pub max_iterations: usize,
    /// Stop once the (pseudo-)gradient norm falls below
    /// `convergence_tol * max(1, ||w||)`.
    pub convergence_tol: f64,
    /// Number of correction pairs kept by the quasi-Newton update.
    #[serde(default = "default_memory")]
    pub memory: usize,
}

fn default_memory() -> usize {
    6
}

impl Default for CrfHyperparams {
    fn default() -> Self {
        CrfHyperparams {
            c1: 0.0,
            c2: 0.1,
            max_iterations: 200,
            convergence_tol: 1e-5,
            memory: default_memory(),
        }
    }
}

impl CrfHyperparams {
    pub fn with_regularization(mut self, c1: f64, c2: f64) -> Self {
        self.c1 = c1;
        self.c2 = c2;
        self
    }

    pub fn validate(&self) -> Result<(), CrfError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.c1) && ok(self.c2) {
            Ok(())
        } else {
            Err(CrfError::InvalidHyperparams {
                c1: self.c1,
                c2: self.c2,
            })
        }
    }
}

/// One training sequence: feature ids per position and the gold labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub features: Vec<FeatureVector>,
    pub labels: Vec<BioLabel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    labels: Vec<BioLabel>,
    features: FeatureTable,
    /// `features.len() * labels.len()`, feature-major.
    state_weights: Vec<f64>,
    /// `(labels.len() + 1) * labels.len()`; row `labels.len()` is START.
    transitions: Vec<f64>,
    hyper: CrfHyperparams,
    /// Free-form settings stored alongside the weights (e.g. the feature
    /// template used to build the inputs).
    metadata: Option<serde_json::Value>,
}

impl CrfModel {
    /// A model with all weights zero.
    pub fn new(labels: Vec<BioLabel>, features: FeatureTable, hyper: CrfHyperparams) -> Self {
        let l = labels.len();
        CrfModel {
            state_weights: vec![0.0; features.len() * l],
            transitions: vec![0.0; (l + 1) * l],
            labels,
            features,
            hyper,
            metadata: None,
        }
    }

    pub fn labels(&self) -> &[BioLabel] {
        &self.labels
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn features(&self) -> &FeatureTable {
        &self.features
    }

    pub fn hyper(&self) -> &CrfHyperparams {
        &self.hyper
    }

    pub fn metadata(&self) -> Option<&serde_json::Value> {
        self.metadata.as_ref()
    }

    pub fn set_metadata(&mut self, metadata: serde_json::Value) {
        self.metadata = Some(metadata);
    }

    pub fn n_weights(&self) -> usize {
        self.state_weights.len() + self.transitions.len()
    }

    pub fn label_index(&self, label: BioLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// All weights in the flat parameter layout.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = self.state_weights.clone();
        w.extend_from_slice(&self.transitions);
        w
    }

    pub fn set_weights(&mut self, weights: &[f64]) -> Result<(), CrfError> {
        if weights.len() != self.n_weights() {
            return Err(CrfError::WeightLength {
                expected: self.n_weights(),
                found: weights.len(),
            });
        }
        let split = self.state_weights.len();
        self.state_weights.copy_from_slice(&weights[..split]);
        self.transitions.copy_from_slice(&weights[split..]);
        Ok(())
    }

    pub fn state_weight(&self, feature: u32, label: usize) -> f64 {
        self.state_weights[feature as usize * self.labels.len() + label]
    }

    pub fn set_state_weight(&mut self, feature: u32, label: usize, w: f64) {
        let l = self.labels.len();
        self.state_weights[feature as usize * l + label] = w;
    }

    /// Transition weight; `prev == None` addresses the START row.
    pub fn transition(&self, prev: Option<usize>, label: usize) -> f64 {
        let l = self.labels.len();
        self.transitions[prev.unwrap_or(l) * l + label]
    }

    pub fn set_transition(&mut self, prev: Option<usize>, label: usize, w: f64) {
        let l = self.labels.len();
        self.transitions[prev.unwrap_or(l) * l + label] = w;
    }

    /// Maps named features to ids, dropping names the model never saw.
    pub fn encode<S: AsRef<str>>(&self, named: &[Vec<S>]) -> Vec<FeatureVector> {
        named
            .iter()
            .map(|names| FeatureVector::new(names.iter().filter_map(|n| self.features.id(n.as_ref()))))
            .collect()
    }

    fn check_features(&self, x: &[FeatureVector]) -> Result<(), CrfError> {
        let n = self.features.len();
        for fv in x {
            if let Some(&id) = fv.ids().iter().find(|&&id| id as usize >= n) {
                return Err(CrfError::UnknownFeature { id, n_features: n });
            }
        }
        Ok(())
    }

    pub fn log_potentials(&self, x: &[FeatureVector]) -> Result<LogPotentials, CrfError> {
        if x.is_empty() {
            return Err(CrfError::Empty("sequence"));
        }
        if self.labels.is_empty() {
            return Err(CrfError::Empty("label set"));
        }
        self.check_features(x)?;
        Ok(LogPotentials::build(&self.state_weights, &self.transitions, self.labels.len(), x))
    }

    /// Log of the sum of `exp(score)` over every label sequence.
    pub fn log_partition(&self, x: &[FeatureVector]) -> Result<f64, CrfError> {
        let pot = self.log_potentials(x)?;
        Ok(inference::forward(&pot).1)
    }

    /// Unnormalized log score of a label index sequence.
    pub fn sequence_score(&self, x: &[FeatureVector], labels: &[usize]) -> Result<f64, CrfError> {
        if x.len() != labels.len() {
            return Err(CrfError::ShapeMismatch {
                features: x.len(),
                labels: labels.len(),
            });
        }
        let pot = self.log_potentials(x)?;
        Ok(pot.path_score(labels))
    }

    /// Most probable label sequence and its log score.
    ///
    /// Ties go to the lowest label index, both at every backpointer and in
    /// the final position.
    pub fn viterbi(&self, x: &[FeatureVector]) -> Result<(Vec<BioLabel>, f64), CrfError> {
        let (path, score) = self.viterbi_indices(x)?;
        Ok((path.into_iter().map(|i| self.labels[i]).collect(), score))
    }

    pub fn viterbi_indices(&self, x: &[FeatureVector]) -> Result<(Vec<usize>, f64), CrfError> {
        let pot = self.log_potentials(x)?;
        Ok(inference::viterbi(&pot))
    }

    /// Regularized negative log-likelihood (L2 part only) and its exact
    /// gradient in the flat parameter layout.
    pub fn nll_and_gradient(&self, dataset: &[LabeledSequence]) -> Result<(f64, Vec<f64>), CrfError> {
        let instances = self.index_dataset(dataset)?;
        let w = self.weights();
        Ok(train::objective(
            &w,
            self.features.len(),
            self.labels.len(),
            &instances,
            self.hyper.c2,
        ))
    }

    pub(crate) fn index_dataset(&self, dataset: &[LabeledSequence]) -> Result<Vec<train::Instance>, CrfError> {
        dataset
            .iter()
            .map(|seq| {
                if seq.features.len() != seq.labels.len() {
                    return Err(CrfError::ShapeMismatch {
                        features: seq.features.len(),
                        labels: seq.labels.len(),
                    });
                }
                if seq.features.is_empty() {
                    return Err(CrfError::Empty("sequence"));
                }
                self.check_features(&seq.features)?;
                let y = seq
                    .labels
                    .iter()
                    .map(|&l| self.label_index(l).ok_or(CrfError::UnknownLabel(l)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(train::Instance {
                    x: seq.features.clone(),
                    y,
                })
            })
            .collect()
    }
}

use rayon::prelude::*;

use super::inference::{accumulate_expectations, LogPotentials};
use super::optim::{minimize, QuasiNewtonConfig, StopReason};
use super::{CrfError, CrfHyperparams, CrfModel, FeatureTable, FeatureVector, LabeledSequence};
use crate::corpus::BioLabel;
use crate::eval;

/// Gradient partials are computed over at most this many contiguous slices
/// of the dataset and summed in slice order, so results do not depend on
/// the thread pool.
const MAX_CHUNKS: usize = 4;

#[derive(Debug, Clone)]
pub(crate) struct Instance {
    pub x: Vec<FeatureVector>,
    pub y: Vec<usize>,
}

fn chunk_objective(
    w: &[f64],
    n_features: usize,
    n_labels: usize,
    instances: &[Instance],
) -> (f64, Vec<f64>) {
    let n_state = n_features * n_labels;
    let (state, trans) = w.split_at(n_state);
    let mut grad = vec![0.0; w.len()];
    let mut nll = 0.0;
    for inst in instances {
        let pot = LogPotentials::build(state, trans, n_labels, &inst.x);
        let log_z = accumulate_expectations(&pot, &inst.x, n_state, &mut grad);
        nll += log_z - pot.path_score(&inst.y);
        let mut prev = n_labels;
        for (fv, &y) in inst.x.iter().zip(&inst.y) {
            for &f in fv.ids() {
                grad[f as usize * n_labels + y] -= 1.0;
            }
            grad[n_state + prev * n_labels + y] -= 1.0;
            prev = y;
        }
    }
    (nll, grad)
}

/// Negative log-likelihood plus `c2 * ||w||^2`, and its gradient.
pub(crate) fn objective(
    w: &[f64],
    n_features: usize,
    n_labels: usize,
    instances: &[Instance],
    c2: f64,
) -> (f64, Vec<f64>) {
    let chunk_len = instances.len().div_ceil(MAX_CHUNKS).max(1);
    let partials: Vec<(f64, Vec<f64>)> = instances
        .par_chunks(chunk_len)
        .map(|chunk| chunk_objective(w, n_features, n_labels, chunk))
        .collect();
    let mut value = 0.0;
    let mut grad = vec![0.0; w.len()];
    for (v, g) in partials {
        value += v;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    if c2 > 0.0 {
        for (gi, wi) in grad.iter_mut().zip(w) {
            value += c2 * wi * wi;
            *gi += 2.0 * c2 * wi;
        }
    }
    (value, grad)
}

/// Labelled sequences together with the label set and feature table they
/// were encoded against.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub labels: Vec<BioLabel>,
    pub features: FeatureTable,
    pub sequences: Vec<LabeledSequence>,
}

impl TrainingSet {
    /// Interns named features into a fresh table. Labels default to the
    /// full 13-label BIO inventory.
    pub fn from_named<S, I>(labels: Option<Vec<BioLabel>>, sequences: I) -> Self
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (Vec<Vec<S>>, Vec<BioLabel>)>,
    {
        let mut features = FeatureTable::new();
        let sequences = sequences
            .into_iter()
            .map(|(named, labels)| LabeledSequence {
                features: named
                    .iter()
                    .map(|names| FeatureVector::new(names.iter().map(|n| features.intern(n.as_ref()))))
                    .collect(),
                labels,
            })
            .collect();
        TrainingSet {
            labels: labels.unwrap_or_else(|| BioLabel::ALL.to_vec()),
            features,
            sequences,
        }
    }

    /// Encodes named sequences against this set's feature table, dropping
    /// unknown names.
    pub fn encode<S, I>(&self, sequences: I) -> Vec<LabeledSequence>
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (Vec<Vec<S>>, Vec<BioLabel>)>,
    {
        sequences
            .into_iter()
            .map(|(named, labels)| LabeledSequence {
                features: named
                    .iter()
                    .map(|names| FeatureVector::new(names.iter().filter_map(|n| self.features.id(n.as_ref()))))
                    .collect(),
                labels,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TrainTrace {
    /// Regularized objective at the start and after each accepted step.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn train(set: &TrainingSet, hyper: CrfHyperparams) -> Result<CrfModel, CrfError> {
    train_with_trace(set, hyper).map(|(model, _)| model)
}

/// Trains from zero weights with L-BFGS, or OWL-QN when `hyper.c1 > 0`.
pub fn train_with_trace(set: &TrainingSet, hyper: CrfHyperparams) -> Result<(CrfModel, TrainTrace), CrfError> {
    hyper.validate()?;
    if set.sequences.is_empty() {
        return Err(CrfError::Empty("training set"));
    }
    if set.labels.is_empty() {
        return Err(CrfError::Empty("label set"));
    }
    let mut model = CrfModel::new(set.labels.clone(), set.features.clone(), hyper);
    let instances = model.index_dataset(&set.sequences)?;
    let n_features = set.features.len();
    let n_labels = set.labels.len();
    let config = QuasiNewtonConfig {
        memory: hyper.memory,
        max_iterations: hyper.max_iterations,
        tol: hyper.convergence_tol,
        l1: hyper.c1,
        ..Default::default()
    };
    let result = minimize(vec![0.0; model.n_weights()], &config, |w| {
        objective(w, n_features, n_labels, &instances, hyper.c2)
    })
    .map_err(|e| CrfError::NonFinite {
        iteration: e.iteration,
        value: e.value,
    })?;
    log::info!(
        "crf training stopped after {} iterations ({:?}), objective {:.4}",
        result.iterations,
        result.stop,
        result.value
    );
    model.set_weights(&result.x)?;
    let trace = TrainTrace {
        objective: result.trace,
        iterations: result.iterations,
        converged: result.stop == StopReason::Converged,
    };
    Ok((model, trace))
}

/// The default tuning grid: c1 in {0, 0.01, 0.1, 1} by c2 in {0.01, 0.1, 1}.
pub fn default_grid() -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    for c1 in [0.0, 0.01, 0.1, 1.0] {
        for c2 in [0.01, 0.1, 1.0] {
            grid.push((c1, c2));
        }
    }
    grid
}

/// Picks the `(c1, c2)` grid point whose model scores the best micro F1 on
/// `dev`. Ties prefer the smaller `c1 + c2`, then the earlier grid entry.
pub fn tune_c1_c2(
    train_set: &TrainingSet,
    dev: &[LabeledSequence],
    grid: &[(f64, f64)],
    base: CrfHyperparams,
) -> Result<CrfHyperparams, CrfError> {
    if grid.is_empty() {
        return Err(CrfError::Empty("tuning grid"));
    }
    let mut best: Option<(f64, f64, CrfHyperparams)> = None;
    for &(c1, c2) in grid {
        let hyper = base.with_regularization(c1, c2);
        let model = train(train_set, hyper)?;
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        for seq in dev {
            gold.extend_from_slice(&seq.labels);
            pred.extend(model.viterbi(&seq.features)?.0);
        }
        let f1 = eval::score_flat(&gold, &pred)
            .expect("decoded sequences match gold length")
            .micro
            .f1;
        log::info!("c1={c1} c2={c2}: dev micro F1 {f1:.4}");
        let better = match &best {
            None => true,
            Some((best_f1, best_sum, _)) => f1 > *best_f1 || (f1 == *best_f1 && c1 + c2 < *best_sum),
        };
        if better {
            best = Some((f1, c1 + c2, hyper));
        }
    }
    Ok(best.expect("grid is non-empty").2)
}

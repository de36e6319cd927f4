#![allow(clippy::needless_range_loop)]

use super::FeatureVector;

/// Per-position log potentials of a sequence.
///
/// The potential of moving from `prev` to `label` at position `t` is the
/// sum of the state weights of the features active at `t` for `label`
/// plus the transition weight `prev -> label`. At `t = 0` the previous
/// state is always START.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPotentials {
    n_labels: usize,
    /// `len * n_labels`.
    unary: Vec<f64>,
    /// `(n_labels + 1) * n_labels`, START last.
    transitions: Vec<f64>,
}

impl LogPotentials {
    pub(crate) fn build(state: &[f64], transitions: &[f64], n_labels: usize, x: &[FeatureVector]) -> Self {
        let mut unary = vec![0.0; x.len() * n_labels];
        for (t, fv) in x.iter().enumerate() {
            let row = &mut unary[t * n_labels..(t + 1) * n_labels];
            for &f in fv.ids() {
                let w = &state[f as usize * n_labels..(f as usize + 1) * n_labels];
                for (u, wi) in row.iter_mut().zip(w) {
                    *u += wi;
                }
            }
        }
        LogPotentials {
            n_labels,
            unary,
            transitions: transitions.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.unary.len().checked_div(self.n_labels).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    /// Potential at position `t`; `prev` must be `None` exactly when `t == 0`.
    pub fn get(&self, t: usize, prev: Option<usize>, label: usize) -> f64 {
        assert_eq!(prev.is_none(), t == 0, "START is only valid at position 0");
        self.unary(t, label) + self.trans(prev.unwrap_or(self.n_labels), label)
    }

    /// The sum of state weights at `t` for `label`.
    pub fn unary(&self, t: usize, label: usize) -> f64 {
        self.unary[t * self.n_labels + label]
    }

    fn trans(&self, row: usize, label: usize) -> f64 {
        self.transitions[row * self.n_labels + label]
    }

    pub fn path_score(&self, labels: &[usize]) -> f64 {
        let mut score = 0.0;
        let mut prev = self.n_labels;
        for (t, &y) in labels.iter().enumerate() {
            score += self.unary(t, y) + self.trans(prev, y);
            prev = y;
        }
        score
    }
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Forward log-messages (`len * n_labels`) and the log partition.
pub(crate) fn forward(pot: &LogPotentials) -> (Vec<f64>, f64) {
    let l = pot.n_labels;
    let n = pot.len();
    let mut alpha = vec![0.0; n * l];
    for y in 0..l {
        alpha[y] = pot.unary(0, y) + pot.trans(l, y);
    }
    for t in 1..n {
        let (done, rest) = alpha.split_at_mut(t * l);
        let prev = &done[(t - 1) * l..];
        for y in 0..l {
            let lse = log_sum_exp((0..l).map(|a| prev[a] + pot.trans(a, y)));
            rest[y] = lse + pot.unary(t, y);
        }
    }
    let log_z = log_sum_exp(alpha[(n - 1) * l..].iter().copied());
    (alpha, log_z)
}

pub(crate) fn backward(pot: &LogPotentials) -> Vec<f64> {
    let l = pot.n_labels;
    let n = pot.len();
    let mut beta = vec![0.0; n * l];
    for t in (0..n - 1).rev() {
        let (head, tail) = beta.split_at_mut((t + 1) * l);
        let next = &tail[..l];
        let cur = &mut head[t * l..];
        for a in 0..l {
            cur[a] = log_sum_exp((0..l).map(|y| pot.trans(a, y) + pot.unary(t + 1, y) + next[y]));
        }
    }
    beta
}

/// Adds the expected feature and transition counts of one sequence to
/// `grad` and returns its log partition.
pub(crate) fn accumulate_expectations(
    pot: &LogPotentials,
    x: &[FeatureVector],
    n_state: usize,
    grad: &mut [f64],
) -> f64 {
    let l = pot.n_labels;
    let n = pot.len();
    let (alpha, log_z) = forward(pot);
    let beta = backward(pot);
    let (state_grad, trans_grad) = grad.split_at_mut(n_state);
    for t in 0..n {
        for y in 0..l {
            let p = (alpha[t * l + y] + beta[t * l + y] - log_z).exp();
            for &f in x[t].ids() {
                state_grad[f as usize * l + y] += p;
            }
            if t == 0 {
                trans_grad[l * l + y] += p;
            }
        }
        if t > 0 {
            for a in 0..l {
                let base = alpha[(t - 1) * l + a] - log_z;
                for y in 0..l {
                    let p = (base + pot.trans(a, y) + pot.unary(t, y) + beta[t * l + y]).exp();
                    trans_grad[a * l + y] += p;
                }
            }
        }
    }
    log_z
}

pub(crate) fn viterbi(pot: &LogPotentials) -> (Vec<usize>, f64) {
    let l = pot.n_labels;
    let n = pot.len();
    let mut delta = vec![0.0; n * l];
    let mut back = vec![0usize; n * l];
    for y in 0..l {
        delta[y] = pot.unary(0, y) + pot.trans(l, y);
    }
    for t in 1..n {
        for y in 0..l {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for a in 0..l {
                let v = delta[(t - 1) * l + a] + pot.trans(a, y);
                if v > best {
                    best = v;
                    arg = a;
                }
            }
            delta[t * l + y] = best + pot.unary(t, y);
            back[t * l + y] = arg;
        }
    }
    let mut last = 0;
    let mut best = f64::NEG_INFINITY;
    for y in 0..l {
        if delta[(n - 1) * l + y] > best {
            best = delta[(n - 1) * l + y];
            last = y;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = back[t * l + path[t]];
    }
    (path, best)
}

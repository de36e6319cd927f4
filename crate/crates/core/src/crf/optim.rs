//! Limited-memory quasi-Newton minimization.
//!
//! With `l1 == 0` this is plain L-BFGS with a backtracking Armijo line
//! search. With `l1 > 0` it runs OWL-QN (Andrew & Gao, 2007): the search
//! direction is built from the pseudo-gradient of `f(x) + l1 * ||x||_1`,
//! restricted to the orthant of the current point, and every trial point
//! is projected back onto that orthant so coordinates can land exactly on
//! zero.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiNewtonConfig {
    pub memory: usize,
    pub max_iterations: usize,
    /// Converged when `||pg|| <= tol * max(1, ||x||)`.
    pub tol: f64,
    pub l1: f64,
    pub max_linesearch: usize,
}

impl Default for QuasiNewtonConfig {
    fn default() -> Self {
        QuasiNewtonConfig {
            memory: 6,
            max_iterations: 100,
            tol: 1e-5,
            l1: 0.0,
            max_linesearch: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// No step along the search direction decreased the objective.
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    /// Objective including the L1 term.
    pub value: f64,
    pub iterations: usize,
    pub stop: StopReason,
    /// Objective value at the start and after every accepted step.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("objective is {value} at iteration {iteration}")]
pub struct NonFiniteObjective {
    pub iteration: usize,
    pub value: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn l1_norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

/// Minimum-norm subgradient of `f + l1 * ||x||_1`.
#[allow(clippy::if_same_then_else)]
pub fn pseudo_gradient(x: &[f64], g: &[f64], l1: f64) -> Vec<f64> {
    if l1 == 0.0 {
        return g.to_vec();
    }
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| {
            if xi < 0.0 {
                gi - l1
            } else if xi > 0.0 {
                gi + l1
            } else if gi + l1 < 0.0 {
                gi + l1
            } else if gi - l1 > 0.0 {
                gi - l1
            } else {
                0.0
            }
        })
        .collect()
}

struct Correction {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// `H * v` via the two-loop recursion.
fn apply_inverse_hessian(history: &VecDeque<Correction>, v: &[f64]) -> Vec<f64> {
    let mut q = v.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for c in history.iter().rev() {
        let a = c.rho * dot(&c.s, &q);
        for (qi, yi) in q.iter_mut().zip(&c.y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some(last) = history.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qi in &mut q {
            *qi *= gamma;
        }
    }
    for (c, a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = c.rho * dot(&c.y, &q);
        for (qi, si) in q.iter_mut().zip(&c.s) {
            *qi += (a - b) * si;
        }
    }
    q
}

/// Minimizes `f(x) + config.l1 * ||x||_1` where `f` returns the smooth value
/// and its gradient.
pub fn minimize<F>(x0: Vec<f64>, config: &QuasiNewtonConfig, mut f: F) -> Result<Minimum, NonFiniteObjective>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let l1 = config.l1;
    let orthant_wise = l1 > 0.0;
    let mut x = x0;
    let (fx, mut g) = f(&x);
    let mut value = fx + l1 * l1_norm(&x);
    if !value.is_finite() {
        return Err(NonFiniteObjective { iteration: 0, value });
    }
    let mut pg = pseudo_gradient(&x, &g, l1);
    let mut history: VecDeque<Correction> = VecDeque::with_capacity(config.memory);
    let mut trace = vec![value];
    let mut iterations = 0;

    let stop = loop {
        if norm(&pg) <= config.tol * norm(&x).max(1.0) {
            break StopReason::Converged;
        }
        if iterations >= config.max_iterations {
            break StopReason::MaxIterations;
        }

        let mut d: Vec<f64> = apply_inverse_hessian(&history, &pg).into_iter().map(|v| -v).collect();
        if orthant_wise {
            for (di, pgi) in d.iter_mut().zip(&pg) {
                if *di * pgi >= 0.0 {
                    *di = 0.0;
                }
            }
        }
        if dot(&d, &pg) >= 0.0 {
            // not a descent direction; restart from steepest descent
            history.clear();
            d = pg.iter().map(|v| -v).collect();
        }
        let orthant: Vec<f64> = if orthant_wise {
            x.iter()
                .zip(&pg)
                .map(|(&xi, &pgi)| {
                    if xi != 0.0 {
                        xi.signum()
                    } else if pgi < 0.0 {
                        1.0
                    } else if pgi > 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        } else {
            Vec::new()
        };

        let mut step = if history.is_empty() { 1.0 / norm(&d).max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..config.max_linesearch {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            if orthant_wise {
                for (xi, oi) in xn.iter_mut().zip(&orthant) {
                    if xi.signum() != *oi || *oi == 0.0 {
                        *xi = 0.0;
                    }
                }
            }
            let (fxn, gn) = f(&xn);
            let vn = fxn + l1 * l1_norm(&xn);
            if vn.is_nan() {
                return Err(NonFiniteObjective {
                    iteration: iterations + 1,
                    value: vn,
                });
            }
            let moved: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            if vn.is_finite() && vn <= value + 1e-4 * dot(&pg, &moved) {
                accepted = Some((xn, gn, vn, moved));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, gn, vn, s)) = accepted else {
            break StopReason::LineSearchFailed;
        };

        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == config.memory {
                history.pop_front();
            }
            if config.memory > 0 {
                history.push_back(Correction { s, y, rho: 1.0 / sy });
            }
        }
        x = xn;
        g = gn;
        value = vn;
        pg = pseudo_gradient(&x, &g, l1);
        iterations += 1;
        trace.push(value);
        log::trace!("iteration {iterations}: objective {value:.6}");
    };

    Ok(Minimum {
        x,
        value,
        iterations,
        stop,
        trace,
    })
}

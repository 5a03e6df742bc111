use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::channel::DiscreteChannel;
use crate::error::{domain, Result};
use crate::logspace::log_sum_exp;

pub const BA_DEFAULT_TOL: f64 = 1e-6;
pub const BA_DEFAULT_MAX_ITER: usize = 10_000;

/// Transition entries more than this many nats below their row maximum are
/// treated as zero. Their total weight in any divergence is below 1e-20.
const ROW_CUTOFF_NATS: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaResult {
    /// Lower bound on the capacity at the final iterate, in bits.
    pub capacity_bits: f64,
    /// Upper bound `max_x D(W(.|x) || q)` at the final iterate, in bits.
    pub upper_bound_bits: f64,
    pub input_distribution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Lower bound after every iteration, in bits.
    pub lower_bounds: Vec<f64>,
}

/// Sparse view of the channel: per row, the contiguous run of outputs whose
/// probability survives the cutoff.
struct Sparse {
    rows: Vec<SparseRow>,
    /// For every output, the `(row, position in row)` pairs that reach it.
    cols: Vec<Vec<(usize, usize)>>,
}

struct SparseRow {
    first: usize,
    log_p: Vec<f64>,
    p: Vec<f64>,
}

impl Sparse {
    fn new(channel: &DiscreteChannel) -> Self {
        let rows: Vec<SparseRow> = (0..channel.n_inputs())
            .map(|i| {
                let row = channel.log_row(i);
                let peak = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let keep = |l: f64| l > f64::NEG_INFINITY && l >= peak - ROW_CUTOFF_NATS;
                let first = row.iter().position(|&l| keep(l)).unwrap_or(0);
                let last = row.iter().rposition(|&l| keep(l)).unwrap_or(0);
                let log_p: Vec<f64> = row[first..=last].to_vec();
                let p = log_p.iter().map(|l| l.exp()).collect();
                SparseRow { first, log_p, p }
            })
            .collect();
        let mut cols = vec![Vec::new(); channel.n_outputs()];
        for (i, r) in rows.iter().enumerate() {
            for (j, &p) in r.p.iter().enumerate() {
                if p > 0.0 {
                    cols[r.first + j].push((i, j));
                }
            }
        }
        Sparse { rows, cols }
    }

    /// `ln q(y) = ln Σ_x r(x) W(y|x)`, `-∞` for unreachable outputs.
    fn log_output(&self, log_r: &[f64]) -> Vec<f64> {
        self.cols
            .par_iter()
            .map(|entries| {
                let mut m = f64::NEG_INFINITY;
                for &(i, j) in entries {
                    m = m.max(log_r[i] + self.rows[i].log_p[j]);
                }
                if m == f64::NEG_INFINITY {
                    return m;
                }
                let s: f64 = entries
                    .iter()
                    .map(|&(i, j)| (log_r[i] + self.rows[i].log_p[j] - m).exp())
                    .sum();
                m + s.ln()
            })
            .collect()
    }

    /// `D(W(.|x) || q)` in nats for every input.
    fn divergences(&self, log_q: &[f64]) -> Vec<f64> {
        self.rows
            .par_iter()
            .map(|r| {
                r.p.iter()
                    .zip(&r.log_p)
                    .enumerate()
                    .filter(|(_, (p, _))| **p > 0.0)
                    .map(|(j, (p, lp))| p * (lp - log_q[r.first + j]))
                    .sum::<f64>()
                    .max(0.0)
            })
            .collect()
    }
}

/// Largest over-relaxation factor tried in the exponent of the update.
const MAX_STEP: f64 = 256.0;

/// An input distribution with its divergences and lower bound.
struct Iterate {
    log_r: Vec<f64>,
    d: Vec<f64>,
    /// `ln Σ r(x) e^{D_x}` in nats.
    lower: f64,
}

impl Iterate {
    fn new(sparse: &Sparse, log_r: Vec<f64>) -> Self {
        let log_q = sparse.log_output(&log_r);
        let d = sparse.divergences(&log_q);
        let weighted: Vec<f64> = log_r.iter().zip(&d).map(|(lr, di)| lr + di).collect();
        let lower = log_sum_exp(&weighted);
        Iterate { log_r, d, lower }
    }

    fn upper(&self) -> f64 {
        self.d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `r'(x) ∝ r(x) e^{step D_x}`; `step = 1` is the classical update.
    fn advance(&self, sparse: &Sparse, step: f64) -> Self {
        let weighted: Vec<f64> = self.log_r.iter().zip(&self.d).map(|(lr, di)| lr + step * di).collect();
        let norm = log_sum_exp(&weighted);
        Iterate::new(sparse, weighted.into_iter().map(|w| w - norm).collect())
    }
}

/// Classical iterations between attempts at the interior-point polish.
const POLISH_EVERY: usize = 200;

impl Sparse {
    /// `Σ_y W(y|i) W(y|j) / q(y)`, the negated Hessian of the mutual
    /// information in nats.
    fn curvature(&self, log_q: &[f64]) -> DMatrix<f64> {
        let n = self.rows.len();
        let partial = self
            .cols
            .par_iter()
            .enumerate()
            .fold(
                || DMatrix::<f64>::zeros(n, n),
                |mut m, (y, entries)| {
                    if log_q[y] == f64::NEG_INFINITY {
                        return m;
                    }
                    let inv_q = (-log_q[y]).exp();
                    for &(i, a) in entries {
                        let wi = self.rows[i].p[a] * inv_q;
                        for &(j, b) in entries {
                            if j >= i {
                                m[(i, j)] += wi * self.rows[j].p[b];
                            }
                        }
                    }
                    m
                },
            )
            .reduce(|| DMatrix::<f64>::zeros(n, n), |a, b| a + b);
        let mut m = partial;
        m.fill_lower_triangle_with_upper_triangle();
        m
    }

    /// Mutual information `Σ r(x) D_x` in nats.
    fn information(&self, r: &[f64]) -> (f64, Vec<f64>) {
        let log_r: Vec<f64> = r.iter().map(|x| x.ln()).collect();
        let d = self.divergences(&self.log_output(&log_r));
        (r.iter().zip(&d).map(|(a, b)| a * b).sum(), d)
    }
}

/// Maximise `I(r) + t Σ ln r(x)` over the simplex by damped Newton steps,
/// for a decreasing sequence of `t`, until the barrier bound `n t` on the
/// suboptimality is below `tol` nats. Returns `None` if a Newton system
/// cannot be factorised.
fn barrier_polish(sparse: &Sparse, start: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = start.len();
    let floor = 1e-12;
    let total: f64 = start.iter().map(|x| x.max(floor)).sum();
    let mut r: Vec<f64> = start.iter().map(|x| x.max(floor) / total).collect();
    let mut t = 1e-4;
    let objective = |r: &[f64], t: f64| -> (f64, Vec<f64>) {
        let (i, d) = sparse.information(r);
        (i + t * r.iter().map(|x| x.ln()).sum::<f64>(), d)
    };
    loop {
        for _ in 0..60 {
            let log_r: Vec<f64> = r.iter().map(|x| x.ln()).collect();
            let log_q = sparse.log_output(&log_r);
            let d = sparse.divergences(&log_q);
            let grad = DVector::from_iterator(n, (0..n).map(|i| d[i] - 1.0 + t / r[i]));
            let mut a = sparse.curvature(&log_q);
            for i in 0..n {
                a[(i, i)] += t / (r[i] * r[i]);
            }
            let chol = a.clone().cholesky()?;
            let u = chol.solve(&grad);
            let v = chol.solve(&DVector::from_element(n, 1.0));
            let step = &u - &v * (u.sum() / v.sum());
            let decrement = step.dot(&(&a * &step));
            if !(decrement.is_finite()) {
                return None;
            }
            if 0.5 * decrement < 0.01 * tol {
                break;
            }
            // Largest step keeping r > 0, then backtracking.
            let mut s: f64 = 1.0;
            for i in 0..n {
                if step[i] < 0.0 {
                    s = s.min(-0.99 * r[i] / step[i]);
                }
            }
            let (phi0, _) = objective(&r, t);
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<f64> = (0..n).map(|i| r[i] + s * step[i]).collect();
                let (phi, _) = objective(&trial, t);
                if phi >= phi0 + 0.25 * s * grad.dot(&step) {
                    r = trial;
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if (n as f64) * t < tol {
            break;
        }
        t *= 0.1;
    }
    let sum: f64 = r.iter().sum();
    Some(r.into_iter().map(|x| x / sum).collect())
}

/// Capacity of a discrete memoryless channel by Blahut–Arimoto iteration.
///
/// Iterates until the gap between the lower bound `ln Σ r(x) e^{D_x}` and
/// the upper bound `max_x D_x` is below `tol` bits, or `max_iter` iterations
/// have run (then `converged` is false and the bracket is still valid). All
/// updates of the input distribution are carried out in log space.
///
/// Each iteration first tries the over-relaxed update `r(x) ∝ r(x) e^{μ D_x}`
/// and keeps it only if the lower bound does not drop; otherwise it takes the
/// classical step (`μ = 1`). `μ` doubles while steps are accepted.
///
/// Near-duplicate rows (finely discretised inputs) make the classical
/// iteration crawl. Every few hundred iterations an interior-point Newton
/// solve is therefore tried from the current distribution; its result
/// replaces the iterate only if it raises the lower bound, so the sequence
/// of lower bounds stays non-decreasing.
pub fn blahut_arimoto(channel: &DiscreteChannel, tol: f64, max_iter: usize) -> Result<BaResult> {
    if !(tol > 0.0) {
        return domain(format!("Blahut-Arimoto tolerance must be positive, got {tol}"));
    }
    if max_iter == 0 {
        return domain("Blahut-Arimoto needs at least one iteration");
    }
    let sparse = Sparse::new(channel);
    let n = channel.n_inputs();
    let mut current = Iterate::new(&sparse, vec![-(n as f64).ln(); n]);
    let mut step = 1.0;
    let mut lower_bounds = vec![current.lower / LN_2];
    let mut converged = false;
    let mut iterations = 0;

    loop {
        if (current.upper() - current.lower) / LN_2 < tol {
            converged = true;
            break;
        }
        if iterations == max_iter {
            break;
        }
        iterations += 1;
        if iterations % POLISH_EVERY == 0 {
            let r: Vec<f64> = current.log_r.iter().map(|l| l.exp()).collect();
            if let Some(polished) = barrier_polish(&sparse, &r, 0.1 * tol * LN_2) {
                let candidate = Iterate::new(&sparse, polished.iter().map(|x| x.ln()).collect());
                if candidate.lower >= current.lower {
                    lower_bounds.push(candidate.lower / LN_2);
                    current = candidate;
                    step = 1.0;
                    continue;
                }
            }
        }
        let mut next = current.advance(&sparse, step);
        if step > 1.0 && next.lower < current.lower {
            step = 1.0;
            next = current.advance(&sparse, 1.0);
        } else {
            step = (step * 2.0).min(MAX_STEP);
        }
        lower_bounds.push(next.lower / LN_2);
        current = next;
    }

    Ok(BaResult {
        capacity_bits: current.lower / LN_2,
        upper_bound_bits: current.upper() / LN_2,
        input_distribution: current.log_r.iter().map(|l| l.exp()).collect(),
        iterations,
        converged,
        lower_bounds,
    })
}

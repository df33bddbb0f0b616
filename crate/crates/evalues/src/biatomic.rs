//! Brute-force verification of the independent-merging property over
//! two-point marginals.
//!
//! A function merges independent e-values if and only if it does so when
//! every input takes at most two values, since any mean-constrained law is
//! a mixture of two-point laws with the same mean. Enumerating per-axis
//! two-point candidates with atoms on a value grid therefore gives a
//! certified lower bound of the true worst-case expectation: a grid
//! maximum above 1 disproves the property outright, a maximum at or below
//! 1 certifies it over every product of the enumerated marginals.

use crate::error::{Error, Result};
use crate::par::map_indexed;

/// A two-point law: `x` with probability `1 - p`, `y >= x` with
/// probability `p`, mean at most 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiAtomic {
    pub x: f64,
    pub y: f64,
    pub p: f64,
}

impl BiAtomic {
    pub fn mean(&self) -> f64 {
        (1.0 - self.p) * self.x + self.p * self.y
    }
}

/// Result of the bi-atomic scan: the largest expectation found and a
/// product law attaining it.
#[derive(Debug, Clone)]
pub struct IeCheck {
    pub worst_mean: f64,
    pub witness: Vec<BiAtomic>,
    /// Per-axis candidates enumerated.
    pub candidates: usize,
}

impl IeCheck {
    /// Whether the scan is consistent with merging independent e-values.
    pub fn valid_on_grid(&self, tol: f64) -> bool {
        self.worst_mean <= 1.0 + tol
    }
}

/// Default ceiling on the number of function evaluations.
pub const DEFAULT_IE_BUDGET: u128 = 200_000_000;

const MEAN_SLACK: f64 = 1e-12;

/// Enumerates per-axis two-point candidates: atoms are grid pairs
/// `x <= y`, probabilities run over `{0, 1/steps, ..., 1}` intersected
/// with the mean constraint, plus the exact boundary probability where
/// the mean hits 1 (worst cases of monotone functions sit there).
fn axis_candidates(values: &[f64], prob_steps: usize) -> Vec<BiAtomic> {
    let mut candidates = Vec::new();
    for (i, &x) in values.iter().enumerate() {
        if x > 1.0 + MEAN_SLACK {
            break; // values ascend, so every later pair violates the mean constraint at p = 0
        }
        for &y in &values[i..] {
            if x == y {
                // A point mass; every p describes the same law.
                candidates.push(BiAtomic { x, y, p: 1.0 });
                continue;
            }
            let boundary = if y > 1.0 { (1.0 - x) / (y - x) } else { 1.0 };
            let mut last = f64::NAN;
            for t in 0..=prob_steps {
                let p = t as f64 / prob_steps as f64;
                if p > boundary + MEAN_SLACK {
                    break;
                }
                candidates.push(BiAtomic { x, y, p });
                last = p;
            }
            if boundary < 1.0 && boundary != last {
                candidates.push(BiAtomic { x, y, p: boundary });
            }
        }
    }
    candidates
}

/// Maximizes `E[F]` over products of grid-supported two-point marginals.
///
/// `value_grid` must be finite, nonnegative, and contain 0; `k` is the
/// number of inputs `f` consumes. Ties are resolved toward the candidate
/// enumerated last (larger atoms and probabilities), so the reported
/// witness sits on the mean boundary whenever the boundary attains the
/// maximum.
pub fn verify_ie_biatomic(
    f: impl Fn(&[f64]) -> f64 + Sync,
    k: usize,
    value_grid: &[f64],
    prob_steps: usize,
    budget: u128,
) -> Result<IeCheck> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one input".into()));
    }
    if prob_steps == 0 {
        return Err(Error::InvalidParameter("prob_steps must be >= 1".into()));
    }
    let mut values: Vec<f64> = value_grid.to_vec();
    for &v in &values {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "atom values must be finite and nonnegative, got {v}"
            )));
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    if values.first() != Some(&0.0) {
        return Err(Error::GridMissingZero(*values.first().unwrap_or(&f64::NAN)));
    }

    let candidates = axis_candidates(&values, prob_steps);
    let per_axis = candidates.len() as u128;
    let evals = per_axis
        .checked_pow(k as u32)
        .and_then(|n| n.checked_mul(1 << k))
        .ok_or(Error::BudgetExceeded {
            cells: u128::MAX,
            budget,
        })?;
    if evals > budget {
        return Err(Error::BudgetExceeded {
            cells: evals,
            budget,
        });
    }

    // Outer axis parallel, inner axes sequential; the final scan keeps the
    // lexicographically last maximizer, independent of thread count.
    let per_outer: Vec<(f64, Vec<usize>)> = map_indexed(candidates.len(), |first| {
        let mut chosen = vec![0usize; k];
        chosen[0] = first;
        let mut best = (f64::NEG_INFINITY, vec![0usize; k]);
        scan_rest(&f, &candidates, &mut chosen, 1, &mut best);
        best
    });
    let mut best = (f64::NEG_INFINITY, vec![0usize; k]);
    for entry in per_outer {
        if entry.0 >= best.0 {
            best = entry;
        }
    }
    let witness: Vec<BiAtomic> = best.1.iter().map(|&i| candidates[i]).collect();
    Ok(IeCheck {
        worst_mean: best.0,
        witness,
        candidates: candidates.len(),
    })
}

fn scan_rest(
    f: &(impl Fn(&[f64]) -> f64 + Sync),
    candidates: &[BiAtomic],
    chosen: &mut Vec<usize>,
    axis: usize,
    best: &mut (f64, Vec<usize>),
) {
    if axis == chosen.len() {
        let mean = product_expectation(f, candidates, chosen);
        if mean >= best.0 {
            *best = (mean, chosen.clone());
        }
        return;
    }
    for i in 0..candidates.len() {
        chosen[axis] = i;
        scan_rest(f, candidates, chosen, axis + 1, best);
    }
}

fn product_expectation(
    f: &(impl Fn(&[f64]) -> f64 + Sync),
    candidates: &[BiAtomic],
    chosen: &[usize],
) -> f64 {
    let k = chosen.len();
    let mut atoms = vec![0.0; k];
    let mut total = 0.0;
    for mask in 0u32..(1 << k) {
        let mut weight = 1.0;
        for (axis, &i) in chosen.iter().enumerate() {
            let c = &candidates[i];
            if mask & (1 << axis) != 0 {
                weight *= c.p;
                atoms[axis] = c.y;
            } else {
                weight *= 1.0 - c.p;
                atoms[axis] = c.x;
            }
        }
        if weight > 0.0 {
            total += weight * f(&atoms);
        }
    }
    total
}

/// [`verify_ie_biatomic`] with the default evaluation budget.
pub fn verify_ie_biatomic_default(
    f: impl Fn(&[f64]) -> f64 + Sync,
    k: usize,
    value_grid: &[f64],
    prob_steps: usize,
) -> Result<IeCheck> {
    verify_ie_biatomic(f, k, value_grid, prob_steps, DEFAULT_IE_BUDGET)
}

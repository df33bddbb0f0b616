//! The discretized envelope constructor: decides whether a merging
//! function is dominated by a test martingale on a grid, and extracts the
//! dominating gambling system when it is.
//!
//! One backward-induction step solves, at every observed prefix,
//!
//! ```text
//!     maximize    sum of f_i p_i
//!     subject to  sum of c_i p_i <= 1,  sum of p_i = 1,  p >= 0
//! ```
//!
//! over distributions `p` on the grid values `c_i` with payoffs
//! `f_i = F_{k+1}(prefix, c_i)`. Geometrically the optimum is the upper
//! concave hull of the points `(c_i, f_i)` evaluated at the best mean
//! `<= 1`, and the dual optimum yields the bet: writing the optimal dual
//! pair as `y_1 = s * value`, `y_2 = (1 - s) * value`, the line
//! `value * (s e + 1 - s)` supports all payoffs from above. Iterating from
//! the horizon down to the empty prefix gives the certified initial value
//! `F_0` and a full bet table.
//!
//! Truncating the grid at `cap` can only shrink the feasible set, so the
//! reported `F_0` is a lower bound that increases as `cap` and the
//! resolution grow.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::martingale::GamblingSystem;
use crate::par::map_indexed;

/// Default ceiling on the largest prefix table, in cells.
pub const DEFAULT_CELL_BUDGET: u128 = 10_000_000;

/// Tolerance for the internal domination check.
pub const DOMINATION_TOL: f64 = 1e-9;

/// The optimum of the mean-constrained payoff maximization over one axis.
///
/// `points` are `(c_i, f_i)` pairs with the `c_i` distinct, ascending,
/// starting at 0 (so that the dual bet is forced into `[0, 1]`), and the
/// `f_i` finite and nonnegative. Returns the optimal value together with
/// the smallest bet `s` in `[0, 1]` satisfying
/// `f_i <= value * (s c_i + 1 - s)` for every point. When every payoff is
/// zero the constraint is vacuous and the bet defaults to 1, so that
/// extraction reproduces the fully-invested system for product-type
/// functions (see the crate notes on zero-capital prefixes).
pub fn concave_majorant(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if points[0].0 != 0.0 {
        return Err(Error::GridMissingZero(points[0].0));
    }
    for (index, &(c, f)) in points.iter().enumerate() {
        if !c.is_finite() || c < 0.0 || (index > 0 && c <= points[index - 1].0) {
            return Err(Error::InvalidParameter(format!(
                "grid values must be ascending and nonnegative (index {index}: {c})"
            )));
        }
        if !f.is_finite() || f < 0.0 {
            return Err(Error::InvalidFunctionValue { index, value: f });
        }
    }
    Ok(majorant_unchecked(points))
}

/// Hull optimization on pre-validated points.
pub(crate) fn majorant_unchecked(points: &[(f64, f64)]) -> (f64, f64) {
    let value = optimal_value(points);
    if value <= 0.0 {
        // All payoffs are zero: any bet satisfies the (vacuous) support
        // inequality. Bet 1 keeps the extracted system constant for
        // product-type functions.
        return (0.0, 1.0);
    }
    // Smallest s with f_i <= value * (s c_i + 1 - s) everywhere. Points
    // with c_i <= 1 only bound s from above (feasibility is guaranteed by
    // the hull optimum), so the binding constraints have c_i > 1.
    let mut s = 0.0f64;
    for &(c, f) in points {
        if c > 1.0 {
            s = s.max((f - value) / (value * (c - 1.0)));
        }
    }
    (value, s.clamp(0.0, 1.0))
}

fn optimal_value(points: &[(f64, f64)]) -> f64 {
    let last = points[points.len() - 1].0;
    if last <= 1.0 {
        // Mean constraint slack for every distribution: take the best point.
        return points.iter().fold(0.0f64, |acc, &(_, f)| acc.max(f));
    }
    let hull = upper_hull(points);
    // Concave envelope: its maximum over [0, 1] sits either at a hull
    // vertex left of 1 or at the chord evaluated at 1.
    let mut best = 0.0f64;
    for &(x, y) in &hull {
        if x <= 1.0 {
            best = best.max(y);
        }
    }
    let mut right = 1;
    while hull[right].0 < 1.0 {
        right += 1;
    }
    let (xl, yl) = hull[right - 1];
    let (xr, yr) = hull[right];
    let at_one = if xr == 1.0 {
        yr
    } else {
        yl + (yr - yl) * (1.0 - xl) / (xr - xl)
    };
    best.max(at_one)
}

/// Upper concave hull of points sorted by ascending x.
fn upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len().min(64));
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Pop b when it lies on or below the segment a -> p.
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Bet table produced by the envelope construction, keyed by exact grid
/// coordinates. Level `k` holds one bet per length-`k` prefix, indexed in
/// row-major order with the last coordinate fastest.
#[derive(Debug, Clone)]
pub struct BetTable {
    grid: GridSpec,
    levels: Vec<Vec<f64>>,
}

impl BetTable {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn prefix_index(&self, prefix: &[f64]) -> Option<usize> {
        let g = self.grid.point_count();
        let mut index = 0usize;
        for &value in prefix {
            index = index * g + self.grid.index_of(value)?;
        }
        Some(index)
    }

    /// The bet after an on-grid prefix; `None` off the grid.
    pub fn bet(&self, prefix: &[f64]) -> Option<f64> {
        let level = self.levels.get(prefix.len())?;
        Some(level[self.prefix_index(prefix)?])
    }

    /// Wraps the table as a gambling system. Panics if evaluated on a
    /// prefix that is off the grid or beyond the horizon.
    pub fn system(&self) -> GamblingSystem {
        let table = Arc::new(self.clone());
        GamblingSystem::new(move |prefix: &[f64]| {
            table
                .bet(prefix)
                .unwrap_or_else(|| panic!("prefix {prefix:?} is off the bet-table grid"))
        })
    }
}

/// Outcome of the backward induction.
#[derive(Debug, Clone)]
pub struct EnvelopeResult {
    /// Certified initial value; a lower bound under grid truncation.
    pub f0: f64,
    /// Extracted bets for every prefix of length `0..dim`.
    pub bets: BetTable,
    /// Value tables `F_k` for prefix lengths `0..dim`
    /// (`values[0] == [f0]`, `values[1]` is the one-step envelope, ...).
    pub values: Vec<Vec<f64>>,
    /// Largest observed violation of
    /// `F_{k+1}(prefix, e) <= F_k(prefix) * (s e + 1 - s)` on the grid.
    pub max_step_violation: f64,
    pub grid: GridSpec,
}

impl EnvelopeResult {
    /// Whether the function is dominated by a test martingale on the grid.
    pub fn dominated_on_grid(&self) -> bool {
        self.f0 <= 1.0 + DOMINATION_TOL
    }

    /// The gambling system built from the extracted bets. Started at
    /// capital `min(f0, 1)`, it dominates the merging function on the grid
    /// whenever `f0 <= 1`.
    pub fn dominating_system(&self) -> GamblingSystem {
        self.bets.system()
    }
}

/// Runs the backward induction for `f` over the grid.
///
/// `f` receives full grid tuples of length `grid.dim()` and must return
/// finite nonnegative values. `max_cells` bounds the largest table
/// (`point_count ^ dim`); [`DEFAULT_CELL_BUDGET`] is a sensible default.
/// The certificate is two-sided: `f0 <= 1` means the extracted bets build
/// a test martingale dominating `f` everywhere on the grid (verified
/// internally, see `max_step_violation`); `f0 > 1` exhibits grid-supported
/// sequential e-variables under which `f` has expectation above 1, so `f`
/// merges no further than the grid allows.
pub fn se_envelope(
    f: impl Fn(&[f64]) -> f64 + Sync,
    grid: &GridSpec,
    max_cells: u128,
) -> Result<EnvelopeResult> {
    let dim = grid.dim();
    let cells = grid
        .cells_at_level(dim)
        .ok_or(Error::BudgetExceeded {
            cells: u128::MAX,
            budget: max_cells,
        })?;
    if cells > max_cells {
        return Err(Error::BudgetExceeded {
            cells,
            budget: max_cells,
        });
    }
    let points = grid.points();
    let g = points.len();

    // Horizon table: evaluate f on every grid tuple.
    let mut level: Vec<f64> = map_indexed(cells as usize, |flat| {
        let mut tuple = vec![0.0; dim];
        let mut rest = flat;
        for slot in tuple.iter_mut().rev() {
            *slot = points[rest % g];
            rest /= g;
        }
        f(&tuple)
    });
    for (index, &value) in level.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidFunctionValue { index, value });
        }
    }

    let mut value_levels: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut bet_levels: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut max_step_violation = 0.0f64;

    for _level_down in 0..dim {
        let prefix_count = level.len() / g;
        let solved: Vec<(f64, f64)> = map_indexed(prefix_count, |p| {
            let payoffs = &level[p * g..(p + 1) * g];
            let pts: Vec<(f64, f64)> = points
                .iter()
                .copied()
                .zip(payoffs.iter().copied())
                .collect();
            majorant_unchecked(&pts)
        });
        // Verify the extracted support lines before discarding the level.
        let violation = map_indexed(prefix_count, |p| {
            let (value, s) = solved[p];
            let payoffs = &level[p * g..(p + 1) * g];
            let mut worst = 0.0f64;
            for (&c, &fv) in points.iter().zip(payoffs) {
                worst = worst.max(fv - value * (s * c + 1.0 - s));
            }
            worst
        })
        .into_iter()
        .fold(0.0f64, f64::max);
        max_step_violation = max_step_violation.max(violation);

        let mut values = Vec::with_capacity(prefix_count);
        let mut bets = Vec::with_capacity(prefix_count);
        for (value, s) in solved {
            values.push(value);
            bets.push(s);
        }
        level = values.clone();
        value_levels.push(values);
        bet_levels.push(bets);
    }
    value_levels.reverse();
    bet_levels.reverse();

    let f0 = value_levels[0][0];
    Ok(EnvelopeResult {
        f0,
        bets: BetTable {
            grid: grid.clone(),
            levels: bet_levels,
        },
        values: value_levels,
        max_step_violation,
        grid: grid.clone(),
    })
}

/// [`se_envelope`] with the default cell budget.
pub fn se_envelope_default(
    f: impl Fn(&[f64]) -> f64 + Sync,
    grid: &GridSpec,
) -> Result<EnvelopeResult> {
    se_envelope(f, grid, DEFAULT_CELL_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{merge_mean, merge_product};
    use crate::evector::EVector;
    use crate::martingale::evaluate_martingale;
    use crate::reorder::merge_symmetric_example;
    use approx::assert_relative_eq;

    #[test]
    fn identity_payoff_bets_everything() {
        let points: Vec<(f64, f64)> = (0..=8).map(|i| (i as f64 * 0.5, i as f64 * 0.5)).collect();
        let (value, s) = concave_majorant(&points).unwrap();
        assert_eq!(value, 1.0);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn constant_payoff_never_bets() {
        let points: Vec<(f64, f64)> = (0..=8).map(|i| (i as f64 * 0.5, 0.7)).collect();
        let (value, s) = concave_majorant(&points).unwrap();
        assert_eq!(value, 0.7);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn kinked_payoff_attains_chord_value() {
        // max(e, (e+1)/2) on {0, 0.5, ..., 100}: the hull is the chord from
        // (0, 1/2) to (100, 100), worth 1 + (1 - 1/100)/2 at mean 1,
        // attained by the two-point law {0, 100} with p = 1/100.
        let points: Vec<(f64, f64)> = (0..=200)
            .map(|i| {
                let c = i as f64 * 0.5;
                (c, c.max((c + 1.0) / 2.0))
            })
            .collect();
        let (value, _) = concave_majorant(&points).unwrap();
        assert_relative_eq!(value, 1.495, max_relative = 1e-12);
        let two_point = (1.0 - 0.01) * 0.5 + 0.01 * 100.0;
        assert_relative_eq!(value, two_point, max_relative = 1e-12);
    }

    #[test]
    fn all_points_below_one_take_best_payoff() {
        let points = vec![(0.0, 0.3), (0.5, 0.9), (1.0, 0.4)];
        let (value, s) = concave_majorant(&points).unwrap();
        assert_eq!(value, 0.9);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn input_validation() {
        assert!(matches!(concave_majorant(&[]), Err(Error::EmptyGrid)));
        assert!(matches!(
            concave_majorant(&[(0.5, 1.0)]),
            Err(Error::GridMissingZero(_))
        ));
        assert!(concave_majorant(&[(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(concave_majorant(&[(0.0, -1.0)]).is_err());
        assert!(concave_majorant(&[(0.0, f64::NAN)]).is_err());
    }

    #[test]
    fn product_envelope_is_tight() {
        let grid = GridSpec::new(1, 4.0, 2).unwrap();
        let result = se_envelope_default(|e| merge_product(e), &grid).unwrap();
        assert!((result.f0 - 1.0).abs() <= 1e-9);
        assert!(result
            .bets
            .levels()
            .iter()
            .all(|level| level.iter().all(|&s| s == 1.0)));
        assert!(result.max_step_violation <= DOMINATION_TOL);
        assert!(result.dominated_on_grid());
    }

    #[test]
    fn product_dominating_martingale_is_exact() {
        let grid = GridSpec::new(1, 4.0, 2).unwrap();
        let result = se_envelope_default(|e| merge_product(e), &grid).unwrap();
        let system = result.dominating_system();
        let points = grid.points();
        for &a in &points {
            for &b in &points {
                let e = EVector::new(vec![a, b]).unwrap();
                let traj = evaluate_martingale(&system, 1.0, &e).unwrap();
                assert!(traj.final_value() >= merge_product(e.values()));
            }
        }
    }

    #[test]
    fn mean_envelope_is_one() {
        for (n, cap) in [(1u32, 4.0), (0, 3.0), (2, 8.0)] {
            let grid = GridSpec::new(n, cap, 2).unwrap();
            let result = se_envelope_default(|e| merge_mean(e), &grid).unwrap();
            assert!(
                (result.f0 - 1.0).abs() <= 1e-12,
                "mean envelope f0 = {} on n={n}, cap={cap}",
                result.f0
            );
        }
    }

    #[test]
    fn mean_bets_match_the_mean_martingale() {
        // The mean's system bets 1/(k + sum of prefix deviations): at the
        // root 1/2 for K = 2, after e1 the fraction 1/(1 + e1).
        let grid = GridSpec::new(1, 4.0, 2).unwrap();
        let result = se_envelope_default(|e| merge_mean(e), &grid).unwrap();
        assert_relative_eq!(result.bets.bet(&[]).unwrap(), 0.5, max_relative = 1e-12);
        for &e1 in &grid.points() {
            assert_relative_eq!(
                result.bets.bet(&[e1]).unwrap(),
                1.0 / (1.0 + e1),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn symmetric_example_envelope_exceeds_one() {
        let grid = GridSpec::new(1, 20.0, 2).unwrap();
        let result =
            se_envelope_default(|e| merge_symmetric_example(e[0], e[1]), &grid).unwrap();
        assert!(result.f0 > 1.0, "f0 = {}", result.f0);
        assert!(!result.dominated_on_grid());
    }

    #[test]
    fn budget_is_enforced() {
        let grid = GridSpec::new(2, 100.0, 2).unwrap();
        let err = se_envelope(|e| merge_product(e), &grid, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { cells: 160801, budget: 1000 }));
    }

    #[test]
    fn invalid_function_values_are_rejected() {
        let grid = GridSpec::new(0, 2.0, 1).unwrap();
        assert!(se_envelope_default(|_| f64::NAN, &grid).is_err());
        assert!(se_envelope_default(|_| -1.0, &grid).is_err());
    }

    #[test]
    fn bet_table_lookup() {
        let grid = GridSpec::new(1, 4.0, 2).unwrap();
        let result = se_envelope_default(|e| merge_product(e), &grid).unwrap();
        assert_eq!(result.bets.bet(&[]).unwrap(), 1.0);
        assert_eq!(result.bets.bet(&[0.5]).unwrap(), 1.0);
        assert!(result.bets.bet(&[0.3]).is_none());
        assert!(result.bets.bet(&[0.5, 0.5]).is_none());
    }
}

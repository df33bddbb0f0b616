//! Reading strategies and merging functions for independent e-values.
//!
//! When the e-values are independent, the bettor may choose which one to
//! reveal next based on everything seen so far, as long as each is revealed
//! exactly once. Running a gambling system along the revealed order gives a
//! reordered test martingale, and mixtures of their terminal values over
//! (system, strategy) pairs form the generalized martingale merging
//! functions, a strictly larger class than the terminal values of plain
//! test martingales.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evector::EVector;
use crate::martingale::{GamblingSystem, Trajectory};

/// An adaptive rule choosing which e-value (0-based position) to reveal
/// next, given the values revealed so far in revelation order.
///
/// The requirement that every position is revealed exactly once is
/// enforced dynamically at evaluation time; a general measurable rule
/// cannot be validated statically.
#[derive(Clone)]
pub struct ReadingStrategy {
    next: Arc<dyn Fn(&[f64]) -> usize + Send + Sync>,
}

impl std::fmt::Debug for ReadingStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ReadingStrategy(..)")
    }
}

impl ReadingStrategy {
    pub fn new(next: impl Fn(&[f64]) -> usize + Send + Sync + 'static) -> Self {
        Self { next: Arc::new(next) }
    }

    /// Reveals positions in their natural order.
    pub fn identity() -> Self {
        Self::new(|prefix: &[f64]| prefix.len())
    }

    /// Reveals positions in a fixed order, independent of the values seen.
    pub fn fixed(order: &[usize]) -> Self {
        let order = order.to_vec();
        Self::new(move |prefix: &[f64]| order[prefix.len()])
    }

    /// Builds a strategy from a rule that picks among the positions not yet
    /// revealed. `rule` receives the observed prefix and the ascending list
    /// of unrevealed positions and returns an index into that list, so the
    /// permutation requirement holds by construction. The strategy replays
    /// its own earlier choices to know what remains.
    pub fn from_remaining_rule(
        k: usize,
        rule: impl Fn(&[f64], &[usize]) -> usize + Send + Sync + 'static,
    ) -> Self {
        Self::new(move |prefix: &[f64]| {
            let mut remaining: Vec<usize> = (0..k).collect();
            for step in 0..prefix.len() {
                let choice = rule(&prefix[..step], &remaining);
                remaining.remove(choice.min(remaining.len() - 1));
            }
            let choice = rule(prefix, &remaining);
            remaining[choice.min(remaining.len() - 1)]
        })
    }

    pub fn next(&self, prefix: &[f64]) -> usize {
        (self.next)(prefix)
    }
}

/// Applies a reading strategy to an e-vector, returning the reordered
/// values and the realized revelation order.
///
/// Fails if the strategy repeats a position or points outside the vector.
pub fn apply_reading_strategy(
    pi: &ReadingStrategy,
    e: &EVector,
) -> Result<(EVector, Vec<usize>)> {
    let k = e.len();
    let mut revealed = Vec::with_capacity(k);
    let mut order = Vec::with_capacity(k);
    let mut used = vec![false; k];
    for step in 0..k {
        let index = pi.next(&revealed);
        if index >= k {
            return Err(Error::IndexOutOfRange {
                step: step + 1,
                index,
                len: k,
            });
        }
        if used[index] {
            return Err(Error::RepeatedIndex {
                step: step + 1,
                index,
            });
        }
        used[index] = true;
        order.push(index);
        revealed.push(e[index]);
    }
    Ok((EVector::new(revealed)?, order))
}

/// Runs the betting recursion along the order induced by `pi`:
/// `S_{k+1} = S_k * (s(revealed) * e_next + 1 - s(revealed))`.
///
/// Equals `evaluate_martingale(s, c, reordered)` exactly; both routes are
/// kept so that identity can be tested rather than assumed.
pub fn evaluate_reordered(
    s: &GamblingSystem,
    pi: &ReadingStrategy,
    c: f64,
    e: &EVector,
) -> Result<Trajectory> {
    if !(0.0..=1.0).contains(&c) || !c.is_finite() {
        return Err(Error::InvalidCapital(c));
    }
    let k = e.len();
    let mut revealed: Vec<f64> = Vec::with_capacity(k);
    let mut used = vec![false; k];
    let mut capitals = Vec::with_capacity(k + 1);
    let mut capital = c;
    capitals.push(capital);
    for step in 0..k {
        let index = pi.next(&revealed);
        if index >= k {
            return Err(Error::IndexOutOfRange {
                step: step + 1,
                index,
                len: k,
            });
        }
        if used[index] {
            return Err(Error::RepeatedIndex {
                step: step + 1,
                index,
            });
        }
        used[index] = true;
        let bet = s.bet(&revealed);
        if !(0.0..=1.0).contains(&bet) || !bet.is_finite() {
            return Err(Error::BetOutOfRange {
                prefix: revealed.clone(),
                bet,
            });
        }
        capital *= bet * e[index] + 1.0 - bet;
        capitals.push(capital);
        revealed.push(e[index]);
    }
    Ok(Trajectory::new(capitals))
}

/// One term of a generalized martingale merging function: a gambling
/// system, a reading strategy, an initial capital, and a mixture weight.
#[derive(Clone)]
pub struct MixtureComponent {
    pub weight: f64,
    pub system: GamblingSystem,
    pub strategy: ReadingStrategy,
    pub capital: f64,
}

/// The mixture `sum of w_i * S_K^{s_i, pi_i}(e)` over the components.
///
/// Weights must be nonnegative and sum to 1 within `1e-12`. Randomized
/// betting is expressed only through such finite mixtures, never through
/// internal RNG, so merging stays deterministic.
pub fn merge_generalized(mix: &[MixtureComponent], e: &EVector) -> Result<f64> {
    let mut sum = 0.0;
    for (index, component) in mix.iter().enumerate() {
        if component.weight < 0.0 || !component.weight.is_finite() {
            return Err(Error::NegativeWeight {
                index,
                weight: component.weight,
            });
        }
        sum += component.weight;
    }
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::BadWeights { sum });
    }
    let mut value = 0.0;
    for component in mix {
        let trajectory =
            evaluate_reordered(&component.system, &component.strategy, component.capital, e)?;
        value += component.weight * trajectory.final_value();
    }
    Ok(value)
}

/// The two-round decomposition of a generalized martingale merging
/// function: with probability `beta` reveal the first e-value and bet `a1`
/// on it, then bet `g1(e1)` on the second; with probability `1 - beta` the
/// mirror image.
///
/// The `g` functions only need range `[0, 1]`; monotonicity is not
/// required.
#[derive(Clone)]
pub struct TwoDecomposition {
    beta: f64,
    a1: f64,
    a2: f64,
    g1: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    g2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for TwoDecomposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "TwoDecomposition {{ beta: {}, a1: {}, a2: {}, g1: .., g2: .. }}",
            self.beta, self.a1, self.a2
        )
    }
}

fn check_unit(name: &str, value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {value}"
        )));
    }
    Ok(value)
}

impl TwoDecomposition {
    pub fn new(
        beta: f64,
        a1: f64,
        a2: f64,
        g1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Ok(Self {
            beta: check_unit("beta", beta)?,
            a1: check_unit("a1", a1)?,
            a2: check_unit("a2", a2)?,
            g1: Arc::new(g1),
            g2: Arc::new(g2),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    /// Evaluates
    /// `beta (1 + a1 (e1-1)) (1 + g1(e1) (e2-1)) + (1-beta) (1 + a2 (e2-1)) (1 + g2(e2) (e1-1))`.
    ///
    /// Panics if a `g` callback leaves `[0, 1]`; bets are never clamped.
    pub fn eval(&self, e1: f64, e2: f64) -> f64 {
        let t1 = e1 - 1.0;
        let t2 = e2 - 1.0;
        let b1 = (self.g1)(e1);
        let b2 = (self.g2)(e2);
        assert!(
            (0.0..=1.0).contains(&b1) && (0.0..=1.0).contains(&b2),
            "second-round bet outside [0, 1]: g1({e1}) = {b1}, g2({e2}) = {b2}"
        );
        self.beta * (1.0 + self.a1 * t1) * (1.0 + b1 * t2)
            + (1.0 - self.beta) * (1.0 + self.a2 * t2) * (1.0 + b2 * t1)
    }

    /// The equivalent two-component mixture of reordered test martingales.
    pub fn to_mixture(&self) -> Vec<MixtureComponent> {
        let (a1, g1) = (self.a1, Arc::clone(&self.g1));
        let (a2, g2) = (self.a2, Arc::clone(&self.g2));
        vec![
            MixtureComponent {
                weight: self.beta,
                system: GamblingSystem::new(move |prefix: &[f64]| {
                    if prefix.is_empty() {
                        a1
                    } else {
                        g1(prefix[0])
                    }
                }),
                strategy: ReadingStrategy::identity(),
                capital: 1.0,
            },
            MixtureComponent {
                weight: 1.0 - self.beta,
                system: GamblingSystem::new(move |prefix: &[f64]| {
                    if prefix.is_empty() {
                        a2
                    } else {
                        g2(prefix[0])
                    }
                }),
                strategy: ReadingStrategy::fixed(&[1, 0]),
                capital: 1.0,
            },
        ]
    }
}

/// The symmetric two-variable merging function
/// `(1/2) (e1/(1+e1) + e2/(1+e2)) (1 + e1 e2)`.
///
/// It merges independent e-values (see [`symmetric_example_mixture`] for
/// the betting representation) but no test martingale dominates it.
pub fn merge_symmetric_example(e1: f64, e2: f64) -> f64 {
    0.5 * (e1 / (1.0 + e1) + e2 / (1.0 + e2)) * (1.0 + e1 * e2)
}

/// The two-component mixture realizing [`merge_symmetric_example`]:
/// uncover one value with equal probabilities, invest everything in it,
/// then bet the fraction `x / (1 + x)` of the result on the other.
pub fn symmetric_example_mixture() -> Vec<MixtureComponent> {
    let second_round = |prefix: &[f64]| {
        if prefix.is_empty() {
            1.0
        } else {
            prefix[0] / (1.0 + prefix[0])
        }
    };
    vec![
        MixtureComponent {
            weight: 0.5,
            system: GamblingSystem::new(second_round),
            strategy: ReadingStrategy::identity(),
            capital: 1.0,
        },
        MixtureComponent {
            weight: 0.5,
            system: GamblingSystem::new(second_round),
            strategy: ReadingStrategy::fixed(&[1, 0]),
            capital: 1.0,
        },
    ]
}

/// The exact one-step supremum `sup { E[F(e1, E)] : E >= 0, E[E] <= 1 }`
/// for [`merge_symmetric_example`].
///
/// For fixed `e1` the integrand has second derivative `(e1 - 1)/(1+e)^3`
/// in `e`: concave for `e1 < 1`, where the best e-variable is the point
/// mass at 1 giving `(3 e1 + 1)/4`; convex for `e1 > 1`, where two-point
/// distributions at `{0, y}` approach `e1` as `y` grows (the supremum is
/// not attained). The envelope exceeds 1 in expectation for any
/// non-degenerate mean-1 input, so the symmetric example merges
/// independent but not sequential e-values.
pub fn symmetric_example_envelope(e1: f64) -> f64 {
    e1.max((3.0 * e1 + 1.0) / 4.0)
}

/// The indicator-based merging function
/// `G = 1 on [0, c)^2, 2c - 1 on [c, inf)^2, 0 elsewhere`, for `c > 1`.
///
/// It merges independent e-values yet is not dominated by any generalized
/// martingale merging function.
#[derive(Debug, Clone, Copy)]
pub struct CounterexampleG {
    c: f64,
}

impl CounterexampleG {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "counterexample G requires c > 1, got {c}"
            )));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn eval(&self, e1: f64, e2: f64) -> f64 {
        if e1 < self.c && e2 < self.c {
            1.0
        } else if e1 >= self.c && e2 >= self.c {
            2.0 * self.c - 1.0
        } else {
            0.0
        }
    }
}

/// Convenience wrapper around [`CounterexampleG`].
pub fn counterexample_g(c: f64, e1: f64, e2: f64) -> Result<f64> {
    Ok(CounterexampleG::new(c)?.eval(e1, e2))
}

//! Gambling systems and test martingales.
//!
//! A gambling system maps each observed prefix of e-values to the fraction
//! of current capital staked on the next one. Starting from capital
//! `c <= 1`, the capital process
//!
//! ```text
//!     S_{k+1} = S_k * (s(e_1..e_k) * e_{k+1} + 1 - s(e_1..e_k))
//! ```
//!
//! is a test martingale, and its terminal value as a function of the inputs
//! is a martingale merging function. The equivalent additive form
//! `S_{k+1} = S_k + t(e_1..e_k) * (e_{k+1} - 1)` uses the absolute stake
//! `t = S_k * s` instead of the fraction.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evector::EVector;

/// A capital path `S_0, ..., S_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    capitals: Vec<f64>,
}

impl Trajectory {
    pub(crate) fn new(capitals: Vec<f64>) -> Self {
        Self { capitals }
    }

    pub fn capitals(&self) -> &[f64] {
        &self.capitals
    }

    /// Capital after all `K` rounds; the merged value.
    pub fn final_value(&self) -> f64 {
        *self.capitals.last().expect("trajectory has at least S_0")
    }

    /// Number of rounds `K` (one less than the number of capital entries).
    pub fn rounds(&self) -> usize {
        self.capitals.len() - 1
    }
}

/// A rule assigning a bet fraction in `[0, 1]` to every observed prefix.
///
/// Deterministic: the same prefix always yields the same bet. The range is
/// validated on every call by the evaluators; out-of-range bets fail fast
/// rather than being clamped.
#[derive(Clone)]
pub struct GamblingSystem {
    bet: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for GamblingSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("GamblingSystem(..)")
    }
}

impl GamblingSystem {
    pub fn new(bet: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { bet: Arc::new(bet) }
    }

    /// Bets the same fraction after every prefix.
    pub fn constant(fraction: f64) -> Self {
        Self::new(move |_| fraction)
    }

    /// Always fully invested; generates the product martingale.
    pub fn product() -> Self {
        Self::constant(1.0)
    }

    /// Never bets; capital stays frozen.
    pub fn never() -> Self {
        Self::constant(0.0)
    }

    /// Bets fraction 1 exactly at the steps in `steps` (0-based), 0 elsewhere.
    /// Generates the subset-product martingale for that index set.
    pub fn subset_product(steps: &[usize]) -> Self {
        let steps = steps.to_vec();
        Self::new(move |prefix: &[f64]| {
            if steps.contains(&prefix.len()) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn bet(&self, prefix: &[f64]) -> f64 {
        (self.bet)(prefix)
    }

    /// The absolute-stake form of this system started at capital `c`:
    /// `t(e_1..e_k) = S_k * s(e_1..e_k)` with `S_k` the capital the system
    /// itself reaches along the prefix.
    ///
    /// Panics if the underlying system returns a bet outside `[0, 1]`
    /// while replaying the prefix.
    pub fn to_additive(&self, c: f64) -> StakeFunction {
        let system = self.clone();
        StakeFunction::new(move |prefix: &[f64]| {
            let mut capital = c;
            for k in 0..prefix.len() {
                let bet = system.bet(&prefix[..k]);
                assert!(
                    (0.0..=1.0).contains(&bet),
                    "gambling system returned bet {bet} outside [0, 1]"
                );
                capital *= bet * prefix[k] + 1.0 - bet;
            }
            capital * system.bet(prefix)
        })
    }
}

/// A rule assigning a nonnegative absolute stake to every observed prefix.
#[derive(Clone)]
pub struct StakeFunction {
    stake: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for StakeFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("StakeFunction(..)")
    }
}

impl StakeFunction {
    pub fn new(stake: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { stake: Arc::new(stake) }
    }

    pub fn constant(stake: f64) -> Self {
        Self::new(move |_| stake)
    }

    pub fn stake(&self, prefix: &[f64]) -> f64 {
        (self.stake)(prefix)
    }
}

fn check_capital(c: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&c) || !c.is_finite() {
        return Err(Error::InvalidCapital(c));
    }
    Ok(())
}

/// Runs the multiplicative betting recursion.
///
/// `S_0 = c`, `S_{k+1} = S_k * (s(e_(k)) * e_{k+1} + 1 - s(e_(k)))`,
/// evaluated left to right. Every bet is range-checked before use.
pub fn evaluate_martingale(s: &GamblingSystem, c: f64, e: &EVector) -> Result<Trajectory> {
    check_capital(c)?;
    let values = e.values();
    let mut capitals = Vec::with_capacity(values.len() + 1);
    let mut capital = c;
    capitals.push(capital);
    for k in 0..values.len() {
        let prefix = &values[..k];
        let bet = s.bet(prefix);
        if !(0.0..=1.0).contains(&bet) || !bet.is_finite() {
            return Err(Error::BetOutOfRange {
                prefix: prefix.to_vec(),
                bet,
            });
        }
        capital *= bet * values[k] + 1.0 - bet;
        capitals.push(capital);
    }
    Ok(Trajectory::new(capitals))
}

/// Runs the additive betting recursion `S_{k+1} = S_k + t(e_(k)) * (e_{k+1} - 1)`.
///
/// Fails with [`Error::InfeasibleStake`] if the capital would go negative:
/// the stake function promises feasibility only on the inputs it is
/// evaluated on, so the check happens here.
pub fn evaluate_additive(t: &StakeFunction, c: f64, e: &EVector) -> Result<Trajectory> {
    check_capital(c)?;
    let values = e.values();
    let mut capitals = Vec::with_capacity(values.len() + 1);
    let mut capital = c;
    capitals.push(capital);
    for k in 0..values.len() {
        let prefix = &values[..k];
        let stake = t.stake(prefix);
        if stake < 0.0 || !stake.is_finite() {
            return Err(Error::NegativeStake {
                prefix: prefix.to_vec(),
                stake,
            });
        }
        capital += stake * (values[k] - 1.0);
        if capital < 0.0 {
            return Err(Error::InfeasibleStake {
                step: k + 1,
                capital,
            });
        }
        capitals.push(capital);
    }
    Ok(Trajectory::new(capitals))
}

/// A convex combination of test martingales, itself a test martingale.
#[derive(Debug, Clone)]
pub struct ConvexCombination {
    components: Vec<(f64, GamblingSystem, f64)>,
}

/// Validates weights and capitals and builds the mixture evaluator.
///
/// Each component is `(weight, system, initial capital)`; weights must be
/// nonnegative and sum to 1 within `1e-12`.
pub fn convex_combine(components: Vec<(f64, GamblingSystem, f64)>) -> Result<ConvexCombination> {
    let mut sum = 0.0;
    for (index, (weight, _, capital)) in components.iter().enumerate() {
        if *weight < 0.0 || !weight.is_finite() {
            return Err(Error::NegativeWeight {
                index,
                weight: *weight,
            });
        }
        check_capital(*capital)?;
        sum += weight;
    }
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::BadWeights { sum });
    }
    Ok(ConvexCombination { components })
}

impl ConvexCombination {
    /// The mixture trajectory: at every step the weighted sum of the
    /// component trajectories.
    pub fn evaluate(&self, e: &EVector) -> Result<Trajectory> {
        let mut capitals = vec![0.0; e.len() + 1];
        for (weight, system, capital) in &self.components {
            let trajectory = evaluate_martingale(system, *capital, e)?;
            for (acc, value) in capitals.iter_mut().zip(trajectory.capitals()) {
                *acc += weight * value;
            }
        }
        Ok(Trajectory::new(capitals))
    }

    pub fn merge(&self, e: &EVector) -> Result<f64> {
        Ok(self.evaluate(e)?.final_value())
    }

    /// Mixture initial capital `sum of w_i * c_i`.
    pub fn initial_capital(&self) -> f64 {
        self.components.iter().map(|(w, _, c)| w * c).sum()
    }

    /// The additive form of the mixture: `t = sum of w_i * t_i`. Together
    /// with [`Self::initial_capital`] this represents the mixture as a
    /// single test martingale.
    pub fn stake(&self) -> StakeFunction {
        let parts: Vec<(f64, StakeFunction)> = self
            .components
            .iter()
            .map(|(w, s, c)| (*w, s.to_additive(*c)))
            .collect();
        StakeFunction::new(move |prefix: &[f64]| {
            parts.iter().map(|(w, t)| w * t.stake(prefix)).sum()
        })
    }
}

/// Stops betting once the capital of the modified system (started at
/// capital 1) first reaches `1 / alpha`; bets like `base` before that.
///
/// The resulting merging function is not monotone: a large early e-value
/// freezes the capital while a smaller one keeps it compounding.
pub fn exceed_and_stop(base: &GamblingSystem, alpha: f64) -> Result<GamblingSystem> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let base = base.clone();
    let threshold = 1.0 / alpha;
    Ok(GamblingSystem::new(move |prefix: &[f64]| {
        let mut capital = 1.0;
        for k in 0..prefix.len() {
            if capital >= threshold {
                return 0.0;
            }
            let bet = base.bet(&prefix[..k]);
            capital *= bet * prefix[k] + 1.0 - bet;
        }
        if capital >= threshold {
            0.0
        } else {
            base.bet(prefix)
        }
    }))
}

//! The Gaussian likelihood-ratio experiment.
//!
//! Observations `X_1, ..., X_K` are iid `N(theta_true, 1)`; the null is
//! `theta = 0`. Each round bets the likelihood ratio
//! `exp(theta_k X_k - theta_k^2 / 2)` for a per-round alternative
//! `theta_k`, chosen by one of five strategies. Fixed or externally
//! randomized choices give independent e-values; data-driven choices
//! (posterior mean, running MLE) give sequential ones. The product process
//! is tracked in log scale across many runs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::rng::substream;

/// How the per-round alternative `theta_k` is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Strategy {
    /// The true alternative; growth-optimal.
    FixedTrue,
    /// A fixed misspecified alternative `theta0`.
    FixedMisspecified,
    /// Fresh uniform draw on `[0, uniform_hi]` each round, independent of
    /// the data.
    RandomUniform,
    /// Posterior mean under the conjugate prior `N(theta0, prior_sd^2)`.
    Bayes,
    /// Sample mean of the history; `theta0` before any data.
    Mle,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::FixedTrue,
        Strategy::FixedMisspecified,
        Strategy::RandomUniform,
        Strategy::Bayes,
        Strategy::Mle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::FixedTrue => "fixed_true",
            Strategy::FixedMisspecified => "fixed_misspecified",
            Strategy::RandomUniform => "random_uniform",
            Strategy::Bayes => "bayes",
            Strategy::Mle => "mle",
        }
    }

    pub fn from_name(name: &str) -> Result<Strategy> {
        Strategy::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy '{name}'")))
    }
}

/// Experiment configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Horizon `K`.
    pub k: usize,
    pub runs: usize,
    pub theta_true: f64,
    /// Misspecified alternative, prior mean, and MLE fallback.
    pub theta0: f64,
    pub prior_sd: f64,
    pub uniform_hi: f64,
    pub seed: u64,
    /// Strategies to run, kept in canonical order.
    pub strategies: Vec<Strategy>,
    /// Clamp the MLE to the alternative `theta >= 0`. Validity does not
    /// need it, so it is off by default.
    pub clamp_mle: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            k: 500,
            runs: 1000,
            theta_true: 0.3,
            theta0: 0.1,
            prior_sd: 0.2,
            uniform_hi: 0.5,
            seed: 42,
            strategies: Strategy::ALL.to_vec(),
            clamp_mle: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("horizon k must be >= 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidParameter("runs must be >= 1".into()));
        }
        if !(self.prior_sd > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "prior_sd must be positive, got {}",
                self.prior_sd
            )));
        }
        if !(self.uniform_hi > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "uniform_hi must be positive, got {}",
                self.uniform_hi
            )));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidParameter("no strategies selected".into()));
        }
        Ok(())
    }

    /// Strategies sorted canonically with duplicates removed.
    pub fn canonical_strategies(&self) -> Vec<Strategy> {
        let mut out = self.strategies.clone();
        out.sort();
        out.dedup();
        out
    }
}

/// The likelihood ratio `dN(theta, 1)/dN(0, 1)` at `x`:
/// `exp(theta x - theta^2 / 2)`. Positive, and mean 1 under the null for
/// every `theta`.
pub fn likelihood_ratio(x: f64, theta: f64) -> f64 {
    (theta * x - theta * theta / 2.0).exp()
}

/// Picks `theta_k` from the observed history `X_1 .. X_{k-1}`.
///
/// Only [`Strategy::RandomUniform`] consumes randomness; it must be fed
/// its own substream so the other strategies' draws stay untouched.
pub fn select_theta(
    strategy: Strategy,
    history: &[f64],
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> f64 {
    match strategy {
        Strategy::FixedTrue => config.theta_true,
        Strategy::FixedMisspecified => config.theta0,
        Strategy::RandomUniform => rng.gen::<f64>() * config.uniform_hi,
        Strategy::Bayes => {
            if history.is_empty() {
                return config.theta0; // prior mean
            }
            // Conjugate normal update with unit observation variance:
            // posterior mean (theta0 / sd^2 + sum x) / (1 / sd^2 + m).
            let precision = 1.0 / (config.prior_sd * config.prior_sd);
            (config.theta0 * precision + history.iter().sum::<f64>())
                / (precision + history.len() as f64)
        }
        Strategy::Mle => {
            if history.is_empty() {
                config.theta0
            } else {
                let mean = history.iter().sum::<f64>() / history.len() as f64;
                if config.clamp_mle {
                    mean.max(0.0)
                } else {
                    mean
                }
            }
        }
    }
}

/// Per-strategy log e-process paths, `runs x (K + 1)` each.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub strategies: Vec<Strategy>,
    /// `log_paths[strategy][run][k]` is `log S_k`; entry 0 is always 0.
    pub log_paths: Vec<Vec<Vec<f64>>>,
    pub horizon: usize,
}

impl TrajectorySet {
    pub fn runs(&self) -> usize {
        self.log_paths.first().map_or(0, Vec::len)
    }

    /// Pointwise mean over runs of the log paths (mean of logs, not log of
    /// means).
    pub fn mean_log(&self) -> Vec<Vec<f64>> {
        let runs = self.runs() as f64;
        self.log_paths
            .iter()
            .map(|paths| {
                let mut mean = vec![0.0; self.horizon + 1];
                for path in paths {
                    for (m, v) in mean.iter_mut().zip(path) {
                        *m += v;
                    }
                }
                for m in &mut mean {
                    *m /= runs;
                }
                mean
            })
            .collect()
    }

    /// Sample mean and standard error of the raw e-process `exp(log S_k)`
    /// at time `k` for one strategy.
    pub fn eprocess_mean_at(&self, strategy_index: usize, k: usize) -> crate::mc::MeanSe {
        let values: Vec<f64> = self.log_paths[strategy_index]
            .iter()
            .map(|path| path[k].exp())
            .collect();
        crate::mc::MeanSe::from_samples(&values)
    }
}

/// Runs the experiment: each run draws one `X` sample shared by all
/// strategies (paired comparison), accumulates `sum of log E_k` per
/// strategy, and stores the log paths.
///
/// Substreams: run `r` draws its observations from stream `2r` and the
/// uniform strategy's thetas from stream `2r + 1`, both under
/// `config.seed`. Deterministic given the seed.
pub fn run_experiment(config: &SimConfig) -> Result<TrajectorySet> {
    config.validate()?;
    let strategies = config.canonical_strategies();
    let k = config.k;

    let per_run: Vec<Vec<Vec<f64>>> = map_indexed(config.runs, |r| {
        let mut x_rng = substream(config.seed, 2 * r as u64);
        let mut theta_rng = substream(config.seed, 2 * r as u64 + 1);
        let xs: Vec<f64> = (0..k)
            .map(|_| config.theta_true + x_rng.sample::<f64, _>(StandardNormal))
            .collect();
        strategies
            .iter()
            .map(|&strategy| {
                let mut path = Vec::with_capacity(k + 1);
                let mut log_capital = 0.0;
                path.push(log_capital);
                for step in 0..k {
                    let theta = select_theta(strategy, &xs[..step], config, &mut theta_rng);
                    log_capital += theta * xs[step] - theta * theta / 2.0;
                    path.push(log_capital);
                }
                path
            })
            .collect()
    });

    // Transpose run-major to strategy-major.
    let log_paths: Vec<Vec<Vec<f64>>> = (0..strategies.len())
        .map(|s| per_run.iter().map(|run| run[s].clone()).collect())
        .collect();

    Ok(TrajectorySet {
        strategies,
        log_paths,
        horizon: k,
    })
}

/// Pointwise mean over runs of the log trajectories.
pub fn aggregate(ts: &TrajectorySet) -> Vec<Vec<f64>> {
    ts.mean_log()
}

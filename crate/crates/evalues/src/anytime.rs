//! Monte-Carlo check of anytime validity.
//!
//! A process built from sequential e-values is anytime valid when stopping
//! it at any rule keeps the expectation at most 1, and precise when every
//! fixed-time expectation equals 1. Both together force the process to be
//! a test martingale. The checker estimates `E[F_tau]` for the supplied
//! stopping rules and `E[F_k]` at every fixed time, and also exercises the
//! complementary rules `tau_j = j if tau > j else j + 1`: together with
//! `tau` these always stop at a permutation of `1..K`, so for a precise
//! process the estimates must sum to `K`.

use crate::error::{Error, Result};
use crate::mc::{EValueModel, MeanSe};
use crate::par::map_indexed;
use crate::rng::substream;

/// A stopping rule: stop at the first `k >= 1` whose observed prefix
/// satisfies the rule, or at the horizon.
pub enum StoppingRule {
    /// Stop once the process value reaches the threshold.
    Threshold(f64),
    /// Stop at a fixed time (clamped to the horizon).
    FixedTime(usize),
    /// Stop at the first prefix where the predicate holds.
    Custom(Box<dyn Fn(&[f64]) -> bool + Sync>),
}

impl StoppingRule {
    fn label(&self) -> String {
        match self {
            StoppingRule::Threshold(t) => format!("threshold:{t}"),
            StoppingRule::FixedTime(k) => format!("fixed:{k}"),
            StoppingRule::Custom(_) => "custom".to_string(),
        }
    }

    /// The realized stopping time on one sampled path, given the process
    /// values `f_k` for `k = 1..=K`.
    fn realize(&self, e: &[f64], process_values: &[f64]) -> usize {
        let k = e.len();
        match self {
            StoppingRule::Threshold(t) => {
                for step in 1..=k {
                    if process_values[step - 1] >= *t {
                        return step;
                    }
                }
                k
            }
            StoppingRule::FixedTime(j) => (*j).clamp(1, k),
            StoppingRule::Custom(rule) => {
                for step in 1..=k {
                    if rule(&e[..step]) {
                        return step;
                    }
                }
                k
            }
        }
    }
}

/// Estimates for one stopping rule.
#[derive(Debug, Clone)]
pub struct StoppedEstimate {
    pub rule: String,
    pub estimate: MeanSe,
    /// Within `1 +- 4 se`.
    pub consistent: bool,
    /// `E[F_tau] + sum of E[F_{tau_j}]`; close to the horizon for a
    /// precise process.
    pub permutation_sum: f64,
}

/// Full output of [`check_anytime`].
#[derive(Debug, Clone)]
pub struct AnytimeReport {
    pub runs: usize,
    pub horizon: usize,
    /// `E[F_k]` for `k = 1..=K`.
    pub fixed_time: Vec<MeanSe>,
    pub stopped: Vec<StoppedEstimate>,
    /// Every stopped estimate within `1 +- 4 se`.
    pub anytime_valid: bool,
    /// Every fixed-time estimate within `1 +- 4 se`.
    pub precise: bool,
    /// Human-readable descriptions of the estimates that deviate.
    pub deviations: Vec<String>,
}

impl AnytimeReport {
    pub fn consistent_with_test_martingale(&self) -> bool {
        self.anytime_valid && self.precise
    }
}

const BAND: f64 = 4.0;

/// Runs the Monte-Carlo anytime check.
///
/// `process` maps an observed prefix of length `k` to the value `F_k`;
/// the empty prefix gives the initial value. Deterministic given the seed
/// and independent of thread count.
pub fn check_anytime(
    process: impl Fn(&[f64]) -> f64 + Sync,
    model: &dyn EValueModel,
    rules: &[StoppingRule],
    runs: usize,
    seed: u64,
) -> Result<AnytimeReport> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    let horizon = model.horizon();
    if horizon == 0 {
        return Err(Error::InvalidParameter("model horizon must be >= 1".into()));
    }

    struct RunSample {
        fixed: Vec<f64>,
        stopped: Vec<f64>,
        complements: Vec<f64>, // per rule: sum of F_{tau_j} over j = 1..K-1
    }

    let samples: Vec<RunSample> = map_indexed(runs, |r| {
        let mut rng = substream(seed, r as u64);
        let e = model.sample(&mut rng);
        let fixed: Vec<f64> = (1..=horizon).map(|k| process(&e[..k])).collect();
        let mut stopped = Vec::with_capacity(rules.len());
        let mut complements = Vec::with_capacity(rules.len());
        for rule in rules {
            let tau = rule.realize(&e, &fixed);
            stopped.push(fixed[tau - 1]);
            // tau_j = j while tau is still ahead, j + 1 once it has passed.
            let mut sum = 0.0;
            for j in 1..horizon {
                let tau_j = if tau > j { j } else { j + 1 };
                sum += fixed[tau_j - 1];
            }
            complements.push(sum);
        }
        RunSample {
            fixed,
            stopped,
            complements,
        }
    });

    let column = |extract: &dyn Fn(&RunSample) -> f64| -> MeanSe {
        let values: Vec<f64> = samples.iter().map(extract).collect();
        MeanSe::from_samples(&values)
    };

    let fixed_time: Vec<MeanSe> = (0..horizon)
        .map(|k| column(&|s: &RunSample| s.fixed[k]))
        .collect();

    let mut stopped = Vec::with_capacity(rules.len());
    for (i, rule) in rules.iter().enumerate() {
        let estimate = column(&|s: &RunSample| s.stopped[i]);
        let complement_mean =
            samples.iter().map(|s| s.complements[i]).sum::<f64>() / runs as f64;
        stopped.push(StoppedEstimate {
            rule: rule.label(),
            consistent: estimate.consistent_with(1.0, BAND),
            permutation_sum: estimate.mean + complement_mean,
            estimate,
        });
    }

    let mut deviations = Vec::new();
    for (k, est) in fixed_time.iter().enumerate() {
        if !est.consistent_with(1.0, BAND) {
            deviations.push(format!(
                "E[F_{}] = {:.6} (se {:.6})",
                k + 1,
                est.mean,
                est.se
            ));
        }
    }
    for est in &stopped {
        if !est.consistent {
            deviations.push(format!(
                "E[F_tau] for {} = {:.6} (se {:.6})",
                est.rule, est.estimate.mean, est.estimate.se
            ));
        }
    }

    Ok(AnytimeReport {
        runs,
        horizon,
        anytime_valid: stopped.iter().all(|s| s.consistent),
        precise: fixed_time.iter().all(|e| e.consistent_with(1.0, BAND)),
        fixed_time,
        stopped,
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::merge_product;
    use crate::mc::IidTwoPoint;

    fn running_product(prefix: &[f64]) -> f64 {
        merge_product(prefix)
    }

    #[test]
    fn product_with_threshold_stopping_is_consistent() {
        let model = IidTwoPoint::symmetric(0.5, 5).unwrap();
        let report = check_anytime(
            running_product,
            &model,
            &[StoppingRule::Threshold(2.0), StoppingRule::FixedTime(3)],
            20_000,
            17,
        )
        .unwrap();
        assert!(report.anytime_valid, "{:?}", report.deviations);
        assert!(report.precise, "{:?}", report.deviations);
        for est in &report.stopped {
            assert!(
                (est.permutation_sum - report.horizon as f64).abs()
                    <= 6.0 * est.estimate.se * (report.horizon as f64),
                "permutation sum {} far from horizon",
                est.permutation_sum
            );
        }
    }

    #[test]
    fn constructed_violation_is_flagged() {
        // F_1 = max(2 - e1, 0), F_2 = product: stopping early exactly when
        // e1 < 1 cashes in both branches, for expectation 1.5.
        let model = IidTwoPoint::symmetric(0.5, 2).unwrap();
        let process = |prefix: &[f64]| match prefix.len() {
            0 => 1.0,
            1 => (2.0 - prefix[0]).max(0.0),
            _ => merge_product(prefix),
        };
        let stop_early = StoppingRule::Custom(Box::new(|prefix: &[f64]| {
            prefix.len() == 1 && prefix[0] < 1.0
        }));
        let report = check_anytime(process, &model, &[stop_early], 20_000, 3).unwrap();
        assert!(!report.anytime_valid);
        let est = &report.stopped[0].estimate;
        assert!(est.consistent_with(1.5, BAND), "estimate {est:?}");
        assert!(!report.deviations.is_empty());
    }

    #[test]
    fn running_mean_martingale_is_consistent() {
        let model = IidTwoPoint::symmetric(0.0, 4).unwrap();
        let k = model.horizon as f64;
        let process = move |prefix: &[f64]| {
            (prefix.iter().sum::<f64>() + k - prefix.len() as f64) / k
        };
        let report = check_anytime(
            process,
            &model,
            &[StoppingRule::Threshold(1.2)],
            20_000,
            23,
        )
        .unwrap();
        assert!(report.anytime_valid, "{:?}", report.deviations);
        assert!(report.precise, "{:?}", report.deviations);
    }

    #[test]
    fn deterministic_given_seed() {
        let model = IidTwoPoint::symmetric(0.5, 3).unwrap();
        let a = check_anytime(running_product, &model, &[StoppingRule::FixedTime(2)], 2000, 9)
            .unwrap();
        let b = check_anytime(running_product, &model, &[StoppingRule::FixedTime(2)], 2000, 9)
            .unwrap();
        assert_eq!(a.fixed_time[0], b.fixed_time[0]);
        assert_eq!(a.stopped[0].estimate, b.stopped[0].estimate);
    }
}

//! Monte-Carlo generators and the empirical e-property check.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::rng::substream;

/// A generator of e-value vectors with the sequential property
/// `E[E_k | past] <= 1` (equal to 1 for the precise models below).
pub trait EValueModel: Sync {
    /// Length of each generated vector.
    fn horizon(&self) -> usize;

    /// Draws one vector of e-values.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
}

/// Independent draws from a two-point law `{lo, hi}` with `P(hi) = p_hi`.
#[derive(Debug, Clone)]
pub struct IidTwoPoint {
    pub lo: f64,
    pub hi: f64,
    pub p_hi: f64,
    pub horizon: usize,
}

impl IidTwoPoint {
    /// The symmetric mean-1 law on `{lo, 2 - lo}`.
    pub fn symmetric(lo: f64, horizon: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&lo) {
            return Err(Error::InvalidParameter(format!(
                "two-point low atom must lie in [0, 1), got {lo}"
            )));
        }
        Ok(Self {
            lo,
            hi: 2.0 - lo,
            p_hi: 0.5,
            horizon,
        })
    }

    /// Solves `P(hi)` so the mean is exactly 1.
    pub fn mean_one(lo: f64, hi: f64, horizon: usize) -> Result<Self> {
        if !(lo < 1.0 && hi > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mean-1 two-point law needs lo < 1 < hi, got ({lo}, {hi})"
            )));
        }
        Ok(Self {
            lo,
            hi,
            p_hi: (1.0 - lo) / (hi - lo),
            horizon,
        })
    }

    pub fn mean(&self) -> f64 {
        (1.0 - self.p_hi) * self.lo + self.p_hi * self.hi
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        if rng.gen::<f64>() < self.p_hi {
            self.hi
        } else {
            self.lo
        }
    }
}

impl EValueModel for IidTwoPoint {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.horizon).map(|_| self.draw(rng)).collect()
    }
}

/// Independent uniform draws on `[0, hi]` (mean `hi / 2`).
#[derive(Debug, Clone)]
pub struct IidUniform {
    pub hi: f64,
    pub horizon: usize,
}

impl EValueModel for IidUniform {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.horizon).map(|_| rng.gen::<f64>() * self.hi).collect()
    }
}

/// Sequential but not independent: the spread of each round's mean-1
/// two-point law widens after an above-1 observation.
#[derive(Debug, Clone)]
pub struct AdaptiveTwoPoint {
    pub horizon: usize,
}

impl EValueModel for AdaptiveTwoPoint {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut values = Vec::with_capacity(self.horizon);
        let mut spread = 0.5;
        for _ in 0..self.horizon {
            let (lo, hi) = (1.0 - spread, 1.0 + spread);
            let x = if rng.gen::<f64>() < 0.5 { hi } else { lo };
            spread = if x > 1.0 { 0.9 } else { 0.3 };
            values.push(x);
        }
        values
    }
}

/// Sample mean and standard error of a statistic over `runs` draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

impl MeanSe {
    /// Whether the estimate is within `band * se` of `target`.
    pub fn consistent_with(&self, target: f64, band: f64) -> bool {
        (self.mean - target).abs() <= band * self.se
    }

    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        MeanSe {
            mean,
            se: (var / n).sqrt(),
        }
    }
}

/// Estimates `E[F(E_1, ..., E_K)]` under the model by Monte Carlo.
///
/// Run `r` draws from `substream(seed, r)`; the per-run values are reduced
/// in run order, so the estimate is identical for any thread count.
pub fn mc_e_property(
    f: impl Fn(&[f64]) -> f64 + Sync,
    model: &dyn EValueModel,
    runs: usize,
    seed: u64,
) -> Result<MeanSe> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    let samples = map_indexed(runs, |r| {
        let mut rng = substream(seed, r as u64);
        f(&model.sample(&mut rng))
    });
    Ok(MeanSe::from_samples(&samples))
}

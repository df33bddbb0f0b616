//! Versioned TOML run configuration.
//!
//! Every config file carries a mandatory `version` field and rejects
//! unknown keys, so stale or misspelled configurations fail loudly instead
//! of silently running with defaults. Function-valued fields (the
//! second-round bets of decompositions and mixture components) are given
//! as piecewise-linear tables.

use std::path::Path;

use evalues::reorder::{MixtureComponent, ReadingStrategy, TwoDecomposition};
use evalues::sim::{SimConfig, Strategy};
use evalues::GamblingSystem;
use serde::Deserialize;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(toml::de::Error),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(e) => write!(f, "cannot parse config: {e}"),
            ConfigError::Invalid(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A piecewise-linear `[0, inf) -> [0, 1]` function given by knots;
/// constant extrapolation outside the knot range.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pwl {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Pwl {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.x.is_empty() || self.x.len() != self.y.len() {
            return Err(ConfigError::Invalid(
                "piecewise-linear table needs matching nonempty x and y".into(),
            ));
        }
        if !self.x.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConfigError::Invalid(
                "piecewise-linear x values must be strictly increasing".into(),
            ));
        }
        if self.y.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(ConfigError::Invalid(
                "piecewise-linear bet values must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.y[0];
        }
        if x >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&knot| knot <= x);
        let (x0, x1) = (self.x[i - 1], self.x[i]);
        let (y0, y1) = (self.y[i - 1], self.y[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// One bet entry in a mixture component: a constant or a piecewise-linear
/// function of the most recently revealed value.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetSpec {
    #[serde(default)]
    pub const_bet: Option<f64>,
    #[serde(default)]
    pub pwl: Option<Pwl>,
}

impl BetSpec {
    fn validate(&self) -> Result<(), ConfigError> {
        match (&self.const_bet, &self.pwl) {
            (Some(c), None) => {
                if !(0.0..=1.0).contains(c) {
                    return Err(ConfigError::Invalid(format!(
                        "constant bet {c} outside [0, 1]"
                    )));
                }
                Ok(())
            }
            (None, Some(p)) => p.validate(),
            _ => Err(ConfigError::Invalid(
                "each bet needs exactly one of const_bet or pwl".into(),
            )),
        }
    }

    fn eval(&self, last_revealed: Option<f64>) -> f64 {
        match (&self.const_bet, &self.pwl) {
            (Some(c), None) => *c,
            (None, Some(p)) => p.eval(last_revealed.unwrap_or(0.0)),
            _ => unreachable!("validated at load"),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub weight: f64,
    #[serde(default = "default_capital")]
    pub capital: f64,
    /// Revelation order as 1-based positions.
    pub order: Vec<usize>,
    /// Bets per step; `bets[j]` applies after `j` values are revealed and
    /// may depend on the last of them.
    pub bets: Vec<BetSpec>,
}

fn default_capital() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureFile {
    pub version: u32,
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionSpec {
    pub beta: f64,
    pub a1: f64,
    pub a2: f64,
    pub g1: Pwl,
    pub g2: Pwl,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionFile {
    pub version: u32,
    pub decomposition: DecompositionSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_theta_true")]
    pub theta_true: f64,
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    #[serde(default = "default_prior_sd")]
    pub prior_sd: f64,
    #[serde(default = "default_uniform_hi")]
    pub uniform_hi: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub strategies: Option<Vec<String>>,
    #[serde(default)]
    pub clamp_mle: bool,
}

fn default_k() -> usize {
    500
}
fn default_runs() -> usize {
    1000
}
fn default_theta_true() -> f64 {
    0.3
}
fn default_theta0() -> f64 {
    0.1
}
fn default_prior_sd() -> f64 {
    0.2
}
fn default_uniform_hi() -> f64 {
    0.5
}
fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    pub version: u32,
    pub simulation: SimulationSpec,
}

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
    toml::from_str(&text).map_err(ConfigError::Parse)
}

fn check_version(version: u32) -> Result<(), ConfigError> {
    if version != CONFIG_VERSION {
        return Err(ConfigError::Invalid(format!(
            "unsupported config version {version} (expected {CONFIG_VERSION})"
        )));
    }
    Ok(())
}

/// Loads a mixture file, returning the components and the arity implied by
/// the revelation orders.
pub fn load_mixture(path: &Path) -> Result<(Vec<MixtureComponent>, usize), ConfigError> {
    let file: MixtureFile = load(path)?;
    check_version(file.version)?;
    if file.components.is_empty() {
        return Err(ConfigError::Invalid("mixture has no components".into()));
    }
    let k = file.components[0].order.len();
    let mut mixture = Vec::with_capacity(file.components.len());
    for (i, spec) in file.components.iter().enumerate() {
        if spec.order.len() != k {
            return Err(ConfigError::Invalid(format!(
                "component {i}: order length {} differs from {k}",
                spec.order.len()
            )));
        }
        let mut sorted = spec.order.clone();
        sorted.sort_unstable();
        if sorted != (1..=k).collect::<Vec<_>>() {
            return Err(ConfigError::Invalid(format!(
                "component {i}: order must be a permutation of 1..={k}"
            )));
        }
        if spec.bets.len() != k {
            return Err(ConfigError::Invalid(format!(
                "component {i}: need {k} bets, got {}",
                spec.bets.len()
            )));
        }
        for bet in &spec.bets {
            bet.validate()?;
        }
        if !(0.0..=1.0).contains(&spec.capital) {
            return Err(ConfigError::Invalid(format!(
                "component {i}: capital {} outside [0, 1]",
                spec.capital
            )));
        }
        let zero_based: Vec<usize> = spec.order.iter().map(|&p| p - 1).collect();
        let bets = spec.bets.clone();
        mixture.push(MixtureComponent {
            weight: spec.weight,
            system: GamblingSystem::new(move |prefix: &[f64]| {
                bets[prefix.len()].eval(prefix.last().copied())
            }),
            strategy: ReadingStrategy::fixed(&zero_based),
            capital: spec.capital,
        });
    }
    Ok((mixture, k))
}

pub fn load_decomposition(path: &Path) -> Result<TwoDecomposition, ConfigError> {
    let file: DecompositionFile = load(path)?;
    check_version(file.version)?;
    let spec = file.decomposition;
    spec.g1.validate()?;
    spec.g2.validate()?;
    let (g1, g2) = (spec.g1.clone(), spec.g2.clone());
    TwoDecomposition::new(
        spec.beta,
        spec.a1,
        spec.a2,
        move |x| g1.eval(x),
        move |x| g2.eval(x),
    )
    .map_err(|e| ConfigError::Invalid(e.to_string()))
}

pub fn load_simulation(path: &Path) -> Result<SimConfig, ConfigError> {
    let file: SimulationFile = load(path)?;
    check_version(file.version)?;
    let spec = file.simulation;
    let strategies = match &spec.strategies {
        None => Strategy::ALL.to_vec(),
        Some(names) => {
            let mut out = Vec::with_capacity(names.len());
            for name in names {
                out.push(
                    Strategy::from_name(name)
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?,
                );
            }
            out
        }
    };
    Ok(SimConfig {
        k: spec.k,
        runs: spec.runs,
        theta_true: spec.theta_true,
        theta0: spec.theta0,
        prior_sd: spec.prior_sd,
        uniform_hi: spec.uniform_hi,
        seed: spec.seed,
        strategies,
        clamp_mle: spec.clamp_mle,
    })
}

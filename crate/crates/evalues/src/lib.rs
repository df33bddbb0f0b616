//! Merging functions for sequential and independent e-values.
//!
//! An e-value is the realization of a nonnegative random variable with
//! expectation at most 1 under the null; large values are evidence against
//! it. This crate builds and certifies rules for combining several
//! e-values into one:
//!
//! - [`martingale`] and [`catalog`]: gambling systems, test martingales,
//!   and the standard martingale merging functions (product, mean,
//!   U-statistics, block products). These merge sequential e-values.
//! - [`reorder`]: reading strategies and generalized martingale merging
//!   functions, which exploit independence by choosing the order in which
//!   e-values are revealed.
//! - [`envelope`], [`biatomic`], [`anytime`], [`mc`]: certification
//!   oracles. The envelope constructor decides, on a dyadic grid, whether
//!   a function is dominated by a test martingale and extracts the
//!   dominating bets; the bi-atomic scan bounds the worst-case expectation
//!   over independent two-point inputs; the anytime checker estimates
//!   stopped expectations under Monte Carlo.
//! - [`sim`]: the Gaussian likelihood-ratio experiment comparing five ways
//!   of picking the per-round alternative.
//!
//! Everything is deterministic given a seed. With the default `parallel`
//! feature the heavy loops fan out through rayon; reductions stay ordered,
//! so results are identical across thread counts and match the sequential
//! build (`--no-default-features`).

pub mod anytime;
pub mod biatomic;
pub mod catalog;
pub mod envelope;
mod error;
mod evector;
pub mod grid;
pub mod martingale;
pub mod mc;
pub mod par;
pub mod reorder;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use evector::EVector;
pub use grid::GridSpec;
pub use martingale::{
    convex_combine, evaluate_additive, evaluate_martingale, exceed_and_stop, ConvexCombination,
    GamblingSystem, StakeFunction, Trajectory,
};

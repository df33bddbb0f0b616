//! The catalog of martingale merging functions: product, arithmetic mean,
//! U-statistics, and block products.
//!
//! All of these are terminal values of test martingales, so each merges
//! sequential e-values into an e-value. The functions here operate on raw
//! slices; input validation happens at the [`crate::EVector`] boundary.

use crate::error::{Error, Result};
use crate::martingale::Trajectory;

/// `e_1 * ... * e_K`, the martingale of the always-fully-invested system.
pub fn merge_product(e: &[f64]) -> f64 {
    e.iter().fold(1.0, |acc, &x| acc * x)
}

/// `(e_1 + ... + e_K) / K`, the most important symmetric merging function.
pub fn merge_mean(e: &[f64]) -> f64 {
    e.iter().sum::<f64>() / e.len() as f64
}

/// The U-statistic of order `n`: the average of all `n`-subset products.
///
/// `U_0 = 1` (empty product), `U_1` is the mean, `U_K` the product.
/// Computed through the elementary symmetric polynomial recurrence rather
/// than subset enumeration, in O(K * n) operations.
pub fn merge_u_statistic(n: usize, e: &[f64]) -> Result<f64> {
    let k = e.len();
    if n > k {
        return Err(Error::SubsetSizeOutOfRange { n, len: k });
    }
    // esym[j] accumulates the elementary symmetric polynomial of degree j.
    let mut esym = vec![0.0; n + 1];
    esym[0] = 1.0;
    for &x in e {
        for j in (1..=n).rev() {
            esym[j] += esym[j - 1] * x;
        }
    }
    Ok(esym[n] / binomial(k, n))
}

fn binomial(k: usize, n: usize) -> f64 {
    let n = n.min(k - n);
    let mut value = 1.0;
    for i in 0..n {
        value = value * (k - i) as f64 / (i + 1) as f64;
    }
    value
}

fn check_breaks(breaks: &[usize], len: usize) -> Result<()> {
    let mut previous = 0usize;
    for &b in breaks {
        if b <= previous || b >= len {
            return Err(Error::InvalidBreaks {
                breaks: breaks.to_vec(),
                len,
            });
        }
        previous = b;
    }
    Ok(())
}

/// Product over blocks of within-block arithmetic means.
///
/// `breaks` are the split points `1 <= K_1 < ... < K_m < K`; blocks are
/// `(0, K_1], (K_1, K_2], ..., (K_m, K]`. No breaks means the plain mean;
/// breaks at every index means the plain product.
pub fn merge_block_product(breaks: &[usize], e: &[f64]) -> Result<f64> {
    check_breaks(breaks, e.len())?;
    let mut value = 1.0;
    let mut start = 0usize;
    for &end in breaks.iter().chain(std::iter::once(&e.len())) {
        let block = &e[start..end];
        value *= block.iter().sum::<f64>() / block.len() as f64;
        start = end;
    }
    Ok(value)
}

/// The running test martingale of the block product:
/// completed blocks contribute their means, the open block contributes
/// `(sum so far + remaining block length) / block length`.
pub fn block_product_trajectory(breaks: &[usize], e: &[f64]) -> Result<Trajectory> {
    check_breaks(breaks, e.len())?;
    let mut capitals = Vec::with_capacity(e.len() + 1);
    let mut completed = 1.0;
    let mut boundaries = breaks.iter().copied().chain(std::iter::once(e.len()));
    let mut block_start = 0usize;
    let mut block_end = boundaries.next().expect("at least the final block");
    let mut block_sum = 0.0;
    capitals.push(1.0);
    for (k, &x) in e.iter().enumerate() {
        block_sum += x;
        let len = (block_end - block_start) as f64;
        capitals.push(completed * (block_sum + (block_end - (k + 1)) as f64) / len);
        if k + 1 == block_end {
            completed *= block_sum / len;
            block_sum = 0.0;
            block_start = block_end;
            if let Some(next) = boundaries.next() {
                block_end = next;
            }
        }
    }
    Ok(Trajectory::new(capitals))
}

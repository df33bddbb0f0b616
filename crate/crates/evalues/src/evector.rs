//! Validated vectors of e-values.

use crate::error::{Error, Result};

/// A finite sequence of e-values `e_1, ..., e_K`.
///
/// Every entry is finite and nonnegative; the length is fixed at
/// construction and is at least 1. Infinite e-values are legal in theory
/// but rejected here: the betting recursion with a positive bet would
/// produce `inf * 0` indeterminacy downstream, and the exact-equality
/// trajectory tests require finite arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct EVector {
    values: Vec<f64>,
}

impl EVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyEVector);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidEValue { index, value });
            }
        }
        Ok(Self { values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }
}

impl std::ops::Index<usize> for EVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_zeros_and_positive_values() {
        let e = EVector::new(vec![0.0, 2.5, 1.0]).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e[0], 0.0);
    }

    #[test]
    fn rejects_empty() {
        assert!(matches!(EVector::new(vec![]), Err(Error::EmptyEVector)));
    }

    #[test]
    fn rejects_negative_and_non_finite() {
        assert!(matches!(
            EVector::new(vec![1.0, -0.1]),
            Err(Error::InvalidEValue { index: 1, .. })
        ));
        assert!(EVector::new(vec![f64::INFINITY]).is_err());
        assert!(EVector::new(vec![f64::NAN]).is_err());
    }
}

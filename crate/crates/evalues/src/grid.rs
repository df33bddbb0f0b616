//! Dyadic evaluation grids for the certification oracles.

use crate::error::{Error, Result};

/// A truncated dyadic grid `{0, 2^-n, 2 * 2^-n, ..., cap}` in each of `dim`
/// coordinates.
///
/// `cap` must be a positive multiple of the step `2^-n`, so every grid
/// value is exactly representable and index lookups are bit-exact.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    resolution: u32,
    cap: f64,
    dim: usize,
}

impl GridSpec {
    pub fn new(resolution: u32, cap: f64, dim: usize) -> Result<Self> {
        if resolution > 32 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution {resolution} too fine (max 32)"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("grid dimension must be >= 1".into()));
        }
        let step = (0.5f64).powi(resolution as i32);
        let count = cap / step;
        if !(cap > 0.0) || !cap.is_finite() || count.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "grid cap {cap} is not a positive multiple of the step {step}"
            )));
        }
        if count > 2_147_483_647.0 {
            return Err(Error::InvalidParameter(format!(
                "grid cap {cap} at resolution {resolution} yields too many points"
            )));
        }
        Ok(Self {
            resolution,
            cap,
            dim,
        })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> f64 {
        (0.5f64).powi(self.resolution as i32)
    }

    /// Number of points along one axis.
    pub fn point_count(&self) -> usize {
        (self.cap / self.step()) as usize + 1
    }

    /// All grid values along one axis, ascending from 0.
    pub fn points(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.point_count()).map(|i| i as f64 * step).collect()
    }

    /// Index of a value on the axis, if it lies on the grid exactly.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        let step = self.step();
        let i = (value / step).round();
        if i < 0.0 || i >= self.point_count() as f64 {
            return None;
        }
        let i = i as usize;
        (i as f64 * step == value).then_some(i)
    }

    /// Table size for prefixes of length `k`, or `None` on overflow.
    pub fn cells_at_level(&self, k: usize) -> Option<u128> {
        (self.point_count() as u128).checked_pow(u32::try_from(k).ok()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_and_lookup() {
        let grid = GridSpec::new(1, 4.0, 2).unwrap();
        assert_eq!(grid.point_count(), 9);
        assert_eq!(grid.points()[0], 0.0);
        assert_eq!(grid.points()[8], 4.0);
        assert_eq!(grid.index_of(2.5), Some(5));
        assert_eq!(grid.index_of(2.6), None);
        assert_eq!(grid.index_of(4.5), None);
        assert_eq!(grid.index_of(-0.5), None);
    }

    #[test]
    fn rejects_non_multiple_cap() {
        assert!(GridSpec::new(1, 4.3, 2).is_err());
        assert!(GridSpec::new(0, 0.0, 2).is_err());
        assert!(GridSpec::new(2, -1.0, 2).is_err());
    }

    #[test]
    fn level_cells() {
        let grid = GridSpec::new(2, 100.0, 2).unwrap();
        assert_eq!(grid.point_count(), 401);
        assert_eq!(grid.cells_at_level(2), Some(401 * 401));
        assert_eq!(grid.cells_at_level(0), Some(1));
    }
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest number of 2D modes assembled densely: `(2·64 + 1)²`.
pub const MAX_MODES_2D: usize = 16_641;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    pub fn from_usize(d: usize) -> Result<Self> {
        match d {
            1 => Ok(Dimension::One),
            2 => Ok(Dimension::Two),
            _ => Err(Error::InvalidSetup(format!("dimension must be 1 or 2, got {d}"))),
        }
    }

    pub fn as_usize(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
        }
    }
}

/// Truncated set of transverse-momentum indices `n ∈ [−n_max, n_max]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeGrid<T> {
    pub dimension: Dimension,
    pub n_max: usize,
    /// Required ratio between `n_max` and the pupil half-extent in mode units.
    pub safety: T,
}

impl<T: Real> ModeGrid<T> {
    pub fn new(dimension: Dimension, n_max: usize) -> Result<Self> {
        let grid = Self { dimension, n_max, safety: T::lit(2.0) };
        grid.check_size()?;
        Ok(grid)
    }

    /// Smallest grid satisfying the adequacy bound for a half-extent `rho`.
    pub fn adequate(dimension: Dimension, rho: T) -> Result<Self> {
        let safety = T::lit(2.0);
        let n_max = Self::required(safety, rho).max(1);
        Self::new(dimension, n_max)
    }

    pub fn with_safety(mut self, safety: T) -> Result<Self> {
        if !(safety >= T::lit(2.0)) {
            return Err(Error::InvalidSetup(format!("grid safety factor {safety} must be at least 2")));
        }
        self.safety = safety;
        Ok(self)
    }

    fn required(safety: T, rho: T) -> usize {
        // ratios built from physical lengths land a few ulps off integers
        (safety * rho * (T::one() - T::lit(1e-12))).ceil().to_usize().unwrap_or(usize::MAX)
    }

    fn check_size(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::GridTooSmall { n_max: 0, required: 1 });
        }
        if self.dimension == Dimension::Two && self.modes() > MAX_MODES_2D {
            return Err(Error::GridTooLarge { modes: self.modes(), limit: MAX_MODES_2D });
        }
        Ok(())
    }

    /// Fails unless `n_max ≥ ceil(safety · rho)`.
    pub fn check_adequate(&self, rho: T) -> Result<()> {
        self.check_size()?;
        let required = Self::required(self.safety, rho);
        if self.n_max < required {
            return Err(Error::GridTooSmall { n_max: self.n_max, required });
        }
        Ok(())
    }

    pub fn per_axis(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn modes(&self) -> usize {
        self.per_axis().pow(self.dimension.as_usize() as u32)
    }

    /// Index values along one axis, ascending.
    pub fn axis(&self) -> impl Iterator<Item = i64> + Clone {
        let n = self.n_max as i64;
        -n..=n
    }

    /// Mode index of flat position `k`; the second component is 0 in 1D.
    /// Flat order is row-major in `(n_x, n_y)`.
    pub fn index(&self, k: usize) -> [i64; 2] {
        let n = self.n_max as i64;
        match self.dimension {
            Dimension::One => [k as i64 - n, 0],
            Dimension::Two => {
                let p = self.per_axis();
                [(k / p) as i64 - n, (k % p) as i64 - n]
            }
        }
    }

    /// Flat position of the mode `−n` for the mode at `k`.
    pub fn mirror(&self, k: usize) -> usize {
        self.modes() - 1 - k
    }
}

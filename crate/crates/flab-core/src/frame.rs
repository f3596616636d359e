//! Discretization parameters: the scale `delta = 2^-g`, the tree depth `k`,
//! the per-level bit width `T`, and the `2^T`-adic grid conventions every
//! other module works in.

use alloc::format;

use num_traits::{One, Signed};

use crate::exact::{pow2, Q, R64};
use crate::{Error, Result};

/// Which relation ties `delta` to the grid resolution `2^-kT`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    /// `2^-kT <= delta < 2^-k(T-1)`
    Plain,
    /// `2^-kT <= delta/6 < 2^-k(T-1)` (used by the stopping-time construction)
    Sixth,
}

/// Discretization frame. `delta = 2^-g` is an exact power of two; the grid
/// resolution is `2^-kT` and all grid indices fit in an `i64`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleFrame {
    g: u32,
    k: u32,
    t: u32,
    epsilon: R64,
    cbound: R64,
    convention: Convention,
}

impl ScaleFrame {
    pub fn new(
        g: u32,
        k: u32,
        t: u32,
        epsilon: R64,
        cbound: R64,
        convention: Convention,
    ) -> Result<Self> {
        if k == 0 || t == 0 {
            return Err(Error::InvalidFrame(format!("k={k}, T={t} must be positive")));
        }
        let kt = (k as u64) * (t as u64);
        if kt > 62 {
            return Err(Error::InvalidFrame(format!("k*T = {kt} exceeds 62")));
        }
        if !epsilon.is_positive() {
            return Err(Error::InvalidFrame(format!("epsilon = {epsilon} must be positive")));
        }
        if cbound < R64::one() {
            return Err(Error::InvalidFrame(format!("C = {cbound} must be >= 1")));
        }
        let frame = ScaleFrame {
            g,
            k,
            t,
            epsilon,
            cbound,
            convention,
        };
        // lower bound: resolution at least as fine as delta (or delta/6)
        let kt = kt as u32;
        let ok_lower = match convention {
            Convention::Plain => kt >= g,
            Convention::Sixth => kt >= g && (1u128 << (kt - g)) >= 6,
        };
        if !ok_lower {
            return Err(Error::InvalidFrame(format!(
                "resolution 2^-{kt} coarser than the convention allows for delta = 2^-{g}"
            )));
        }
        Ok(frame)
    }

    /// Builds a frame from `delta = 2^-g` and `k`, choosing the smallest `T`
    /// allowed by the convention.
    pub fn from_delta(
        g: u32,
        k: u32,
        epsilon: R64,
        cbound: R64,
        convention: Convention,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidFrame("k must be positive".into()));
        }
        let extra = match convention {
            Convention::Plain => 0,
            Convention::Sixth => 3, // 2^3 = 8 >= 6
        };
        let t = ((g + extra + k - 1) / k).max(1);
        Self::new(g, k, t, epsilon, cbound, convention)
    }

    pub fn g(&self) -> u32 {
        self.g
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn t(&self) -> u32 {
        self.t
    }
    pub fn epsilon(&self) -> R64 {
        self.epsilon
    }
    pub fn cbound(&self) -> R64 {
        self.cbound
    }
    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Number of bits of the grid: resolution is `2^-resolution_bits()`.
    pub fn resolution_bits(&self) -> u32 {
        self.k * self.t
    }

    /// Grid cells per unit interval.
    pub fn cells_per_unit(&self) -> i64 {
        1i64 << self.resolution_bits()
    }

    pub fn delta(&self) -> Q {
        pow2(-(self.g as i64))
    }

    pub fn resolution(&self) -> Q {
        pow2(-(self.resolution_bits() as i64))
    }

    /// `delta` in grid units (number of grid cells spanned by `delta`).
    pub fn delta_cells(&self) -> i64 {
        1i64 << (self.resolution_bits() - self.g)
    }

    /// Side of a level-`j` cell, in grid units.
    pub fn level_cells(&self, j: u32) -> i64 {
        debug_assert!(j <= self.k);
        1i64 << ((self.k - j) * self.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    fn r(n: i64, d: i64) -> R64 {
        R64::new(n, d)
    }

    #[test]
    fn plain_convention_bounds() {
        let f = ScaleFrame::from_delta(10, 2, r(1, 2), R64::one(), Convention::Plain).unwrap();
        assert_eq!(f.t(), 5);
        assert_eq!(f.resolution_bits(), 10);
        assert_eq!(f.delta(), q(1, 1024));
        assert_eq!(f.delta_cells(), 1);
    }

    #[test]
    fn sixth_convention_needs_margin() {
        let f = ScaleFrame::from_delta(12, 3, r(1, 3), R64::one(), Convention::Sixth).unwrap();
        // need 2^(kT-12) >= 6 -> kT >= 15 -> T >= 5
        assert_eq!(f.t(), 5);
        assert_eq!(f.delta_cells(), 8);
    }

    #[test]
    fn word_budget_enforced() {
        assert!(ScaleFrame::new(40, 9, 7, r(1, 9), R64::one(), Convention::Plain).is_err());
        assert!(ScaleFrame::new(10, 2, 3, r(1, 2), R64::one(), Convention::Plain).is_err());
    }
}

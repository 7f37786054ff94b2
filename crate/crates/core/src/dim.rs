//! Dimension and exponent bookkeeping.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Ambient dimension `d` together with the endpoint exponents
/// `p = (d+1)/d` and `q = d+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dimension {
    d: usize,
}

impl Dimension {
    pub const TWO: Dimension = Dimension { d: 2 };
    pub const THREE: Dimension = Dimension { d: 3 };

    pub fn new(d: usize) -> Result<Self> {
        match d {
            2 | 3 => Ok(Dimension { d }),
            _ => Err(Error::Dimension(d)),
        }
    }

    #[inline]
    pub fn d(self) -> usize {
        self.d
    }

    /// Source exponent `(d+1)/d`.
    #[inline]
    pub fn p(self) -> f64 {
        (self.d as f64 + 1.0) / self.d as f64
    }

    /// Target exponent `d+1`.
    #[inline]
    pub fn q(self) -> f64 {
        self.d as f64 + 1.0
    }

    /// `p` as an exact ratio `(d+1, d)`.
    pub fn p_ratio(self) -> (u32, u32) {
        (self.d as u32 + 1, self.d as u32)
    }

    /// Surface area of the unit sphere `S^{d-1}`.
    pub fn sphere_area(self) -> f64 {
        match self.d {
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        }
    }

    /// Volume of the unit ball in `R^d`.
    pub fn ball_volume(self) -> f64 {
        self.sphere_area() / self.d as f64
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "d={}", self.d)
    }
}

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Converts an `f64` to the rational it represents exactly.
pub fn rational(x: f64) -> Result<Rational> {
    BigRational::from_float(x).ok_or_else(|| Error::Invalid(format!("{x} is not finite")))
}

/// `p / q` as a rational.
pub fn ratio(p: i64, q: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Nonnegative piecewise-constant function on `R` with exact rational
/// breakpoints: `values[i]` on `[breaks[i], breaks[i+1])`, 0 outside.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction1D {
    breaks: Vec<Rational>,
    values: Vec<Rational>,
}

impl StepFunction1D {
    pub fn new(breaks: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if breaks.is_empty() && values.is_empty() {
            return Ok(Self::zero());
        }
        if breaks.len() != values.len() + 1 {
            return Err(Error::Invalid(
                "a step function needs one more breakpoint than values".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| v.is_negative()) {
            return Err(Error::NegativeInput);
        }
        Ok(StepFunction1D { breaks, values })
    }

    pub fn from_f64(breaks: &[f64], values: &[f64]) -> Result<Self> {
        let b = breaks.iter().map(|x| rational(*x)).collect::<Result<_>>()?;
        let v = values.iter().map(|x| rational(*x)).collect::<Result<_>>()?;
        Self::new(b, v)
    }

    pub fn zero() -> Self {
        StepFunction1D {
            breaks: Vec::new(),
            values: Vec::new(),
        }
    }

    /// `c · 1_{[a, b)}`.
    pub fn indicator(a: Rational, b: Rational, c: Rational) -> Result<Self> {
        Self::new(vec![a, b], vec![c])
    }

    /// Indicator of the interval with the given center and length.
    pub fn interval(center: &Rational, length: &Rational) -> Result<Self> {
        let h = length / BigInt::from(2);
        Self::indicator(center - &h, center + &h, ratio(1, 1))
    }

    pub fn breaks(&self) -> &[Rational] {
        &self.breaks
    }
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Nonzero pieces `(a, b, value)`.
    pub fn pieces(&self) -> impl Iterator<Item = (&Rational, &Rational, &Rational)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (&self.breaks[i], &self.breaks[i + 1], v))
    }

    pub fn value(&self, t: &Rational) -> Rational {
        if self.breaks.is_empty() || t < &self.breaks[0] || t >= self.breaks.last().unwrap() {
            return Rational::zero();
        }
        let i = self.breaks.partition_point(|b| b <= t) - 1;
        self.values[i].clone()
    }

    pub fn integral(&self) -> Rational {
        self.pieces().fold(Rational::zero(), |acc, (a, b, v)| acc + (b - a) * v)
    }

    /// Measure of `{F > s}`.
    pub fn distribution(&self, s: &Rational) -> Rational {
        self.pieces()
            .filter(|(_, _, v)| *v > s)
            .fold(Rational::zero(), |acc, (a, b, _)| acc + (b - a))
    }

    /// Exact symmetric-decreasing rearrangement: level `u_k` occupies the
    /// centered interval of length `|{F ≥ u_k}|`.
    pub fn rearranged(&self) -> StepFunction1D {
        let mut levels: Vec<Rational> = self.pieces().map(|(_, _, v)| v.clone()).collect();
        levels.sort();
        levels.dedup();
        levels.reverse();
        if levels.is_empty() {
            return Self::zero();
        }
        let two = BigInt::from(2);
        let halves: Vec<Rational> = levels
            .iter()
            .map(|u| {
                let len = self
                    .pieces()
                    .filter(|(_, _, v)| *v >= u)
                    .fold(Rational::zero(), |acc, (a, b, _)| acc + (b - a));
                len / &two
            })
            .collect();
        // breaks: -h_m, …, -h_1, h_1, …, h_m
        let m = levels.len();
        let mut breaks = Vec::with_capacity(2 * m);
        let mut values = Vec::with_capacity(2 * m - 1);
        for k in (0..m).rev() {
            breaks.push(-halves[k].clone());
        }
        for k in 0..m {
            breaks.push(halves[k].clone());
        }
        for k in (0..m).rev() {
            values.push(levels[k].clone());
        }
        for k in 1..m {
            values.push(levels[k].clone());
        }
        StepFunction1D { breaks, values }
    }

    /// `F(· − c)`.
    pub fn shifted(&self, c: &Rational) -> StepFunction1D {
        StepFunction1D {
            breaks: self.breaks.iter().map(|b| b + c).collect(),
            values: self.values.clone(),
        }
    }
}

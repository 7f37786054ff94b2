use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridData;

/// Superlevel set `{F > s}`.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelSet {
    /// Disjoint sorted open intervals on the line.
    Intervals(Vec<(f64, f64)>),
    /// Cell mask on a grid lattice (flat index order).
    Mask(Vec<bool>),
}

impl LevelSet {
    /// Lebesgue measure; masks are counted in cells.
    pub fn measure(&self) -> f64 {
        match self {
            LevelSet::Intervals(iv) => iv.iter().map(|(a, b)| b - a).sum(),
            LevelSet::Mask(m) => m.iter().filter(|b| **b).count() as f64,
        }
    }

    pub fn contains_point(&self, t: f64) -> bool {
        match self {
            LevelSet::Intervals(iv) => iv.iter().any(|(a, b)| *a < t && t < *b),
            LevelSet::Mask(_) => false,
        }
    }

    fn subset_of(&self, other: &LevelSet) -> bool {
        match (self, other) {
            (LevelSet::Mask(a), LevelSet::Mask(b)) => a.iter().zip(b).all(|(x, y)| !*x || *y),
            (LevelSet::Intervals(a), LevelSet::Intervals(b)) => a.iter().all(|(lo, hi)| {
                b.iter()
                    .any(|(x, y)| *x <= *lo + 1e-12 * (1.0 + lo.abs()) && *hi <= *y + 1e-12 * (1.0 + hi.abs()))
            }),
            _ => false,
        }
    }
}

/// Levels `s_0 < … < s_{m-1}` with their superlevel sets.
///
/// Reconstruction is `Σ_k (s_k − s_{k−1}) 1_{E(s_k)}` with `s_{−1} = 0`,
/// which is within one level gap of `F` below the top level.
#[derive(Clone, Debug)]
pub struct LayerCake {
    levels: Vec<f64>,
    sets: Vec<LevelSet>,
}

impl LayerCake {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
    pub fn sets(&self) -> &[LevelSet] {
        &self.sets
    }

    pub fn is_nested(&self) -> bool {
        self.sets.windows(2).all(|w| w[1].subset_of(&w[0]))
    }

    fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().scan(0.0, |prev, s| {
            let g = s - *prev;
            *prev = *s;
            Some(g)
        })
    }

    /// Reconstruction at a point of the line (interval sets only).
    pub fn reconstruct_at(&self, t: f64) -> f64 {
        self.gaps()
            .zip(&self.sets)
            .filter(|(_, e)| e.contains_point(t))
            .map(|(g, _)| g)
            .sum()
    }

    /// Reconstruction on the lattice the masks were taken from.
    pub fn reconstruct_grid(&self, template: &GridData) -> Result<GridData> {
        let mut values = vec![0.0; template.len()];
        for (g, e) in self.gaps().zip(&self.sets) {
            let LevelSet::Mask(m) = e else {
                return Err(Error::Invalid("grid reconstruction needs mask level sets".into()));
            };
            if m.len() != values.len() {
                return Err(Error::Invalid("mask does not match the lattice".into()));
            }
            for (v, b) in values.iter_mut().zip(m) {
                if *b {
                    *v += g;
                }
            }
        }
        GridData::new(template.dim(), template.n(), template.r(), values)
    }
}

/// `count` uniform levels `k · max / count`, `k = 0..count`.
pub fn uniform_levels(max: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 * max / count as f64).collect()
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.iter().any(|s| *s < 0.0 || !s.is_finite()) || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(
            "levels must be finite, nonnegative and increasing".into(),
        ));
    }
    Ok(())
}

/// Superlevel intervals of `F` on `[a, b]`, located by sampling `samples`
/// points and bisecting every sign change of `F − s` to machine precision.
/// `F` must vanish outside `[a, b]` (or be negligible there).
pub fn layer_cake_1d<F: Fn(f64) -> f64 + Sync>(
    f: F,
    a: f64,
    b: f64,
    levels: &[f64],
    samples: usize,
) -> Result<LayerCake> {
    check_levels(levels)?;
    if !(b > a) || samples < 2 {
        return Err(Error::Invalid("layer cake needs a < b and at least two samples".into()));
    }
    let ts: Vec<f64> = (0..samples)
        .map(|i| a + (b - a) * i as f64 / (samples - 1) as f64)
        .collect();
    let vals: Vec<f64> = ts.par_iter().map(|t| f(*t)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("layer cake input must be bounded".into()));
    }
    if vals.iter().any(|v| *v < 0.0) {
        return Err(Error::NegativeInput);
    }
    let crossing = |lo: f64, hi: f64, s: f64| {
        // F(lo) - s and F(hi) - s have opposite signs
        let up = f(lo) > s;
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if (f(m) > s) == up {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    };
    let sets = levels
        .par_iter()
        .map(|&s| {
            let mut iv = Vec::new();
            let mut start = if vals[0] > s { Some(a) } else { None };
            for i in 1..samples {
                let (was, is) = (vals[i - 1] > s, vals[i] > s);
                if !was && is {
                    start = Some(crossing(ts[i - 1], ts[i], s));
                } else if was && !is {
                    iv.push((start.take().unwrap(), crossing(ts[i - 1], ts[i], s)));
                }
            }
            if let Some(s0) = start {
                iv.push((s0, b));
            }
            LevelSet::Intervals(iv)
        })
        .collect();
    Ok(LayerCake {
        levels: levels.to_vec(),
        sets,
    })
}

/// Cell masks `{F > s}` of a grid.
pub fn layer_cake_grid(g: &GridData, levels: &[f64]) -> Result<LayerCake> {
    check_levels(levels)?;
    if g.values().iter().any(|v| *v < 0.0) {
        return Err(Error::NegativeInput);
    }
    let sets = levels
        .par_iter()
        .map(|&s| LevelSet::Mask(g.values().iter().map(|v| *v > s).collect()))
        .collect();
    Ok(LayerCake {
        levels: levels.to_vec(),
        sets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dim::Dimension;
    use crate::grid::Field;

    #[test]
    fn unit_interval_at_half() {
        let f = |t: f64| if (0.0..=1.0).contains(&t) { 1.0 } else { 0.0 };
        let cake = layer_cake_1d(f, -2.0, 3.0, &[0.5], 5001).unwrap();
        let LevelSet::Intervals(iv) = &cake.sets()[0] else {
            panic!()
        };
        assert_eq!(iv.len(), 1);
        assert!(iv[0].0.abs() < 1e-12 && (iv[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extremizer_slice_levels() {
        let f = |t: f64| 1.0 / (1.0 + t * t);
        let levels = [0.05, 0.2, 0.5, 0.9];
        let cake = layer_cake_1d(f, -10.0, 10.0, &levels, 2001).unwrap();
        assert!(cake.is_nested());
        for (s, e) in levels.iter().zip(cake.sets()) {
            let w = (1.0 / s - 1.0).sqrt();
            let LevelSet::Intervals(iv) = e else { panic!() };
            assert_eq!(iv.len(), 1);
            assert!((iv[0].0 + w).abs() < 1e-12 && (iv[0].1 - w).abs() < 1e-12);
        }
    }

    #[test]
    fn staircase_bound() {
        let f = |t: f64| (-t * t).exp() * (2.0 + (3.0 * t).sin());
        let max = (0..20001)
            .map(|i| f(-6.0 + 12.0 * i as f64 / 20000.0))
            .fold(0.0, f64::max);
        let cake = layer_cake_1d(f, -6.0, 6.0, &uniform_levels(max, 100), 4001).unwrap();
        for i in 0..1000 {
            let t = -6.0 + 12.0 * (i as f64 + 0.37) / 1000.0;
            assert!((cake.reconstruct_at(t) - f(t)).abs() <= max / 100.0 + 1e-12);
        }
    }

    #[test]
    fn grid_masks_reconstruct() {
        let f = Field::random_smooth(Dimension::TWO, 2, 3);
        let g = GridData::sample(&f, 32, 4.0).unwrap();
        let max = g.values().iter().cloned().fold(0.0, f64::max);
        let cake = layer_cake_grid(&g, &uniform_levels(max, 128)).unwrap();
        assert!(cake.is_nested());
        let r = cake.reconstruct_grid(&g).unwrap();
        for (a, b) in r.values().iter().zip(g.values()) {
            assert!((a - b).abs() <= max / 128.0 + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(layer_cake_1d(|t| -t * t, -1.0, 1.0, &[0.1], 10).is_err());
        assert!(layer_cake_1d(|t| 1.0 / t, -1.0, 1.0, &[0.1], 11).is_err());
        assert!(layer_cake_1d(|_| 1.0, -1.0, 1.0, &[0.5, 0.1], 10).is_err());
    }
}

use crate::error::{Error, Result};
use crate::grid::{make_direction_grid, Body, Field};

use super::el::golden_min;

/// Fit `f ≈ c (1 + a²ρ²)^{−d/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFit {
    pub c: f64,
    pub a: f64,
    /// `max |f/model − 1|` over the window.
    pub max_deviation: f64,
    /// Radius where the deviation is attained.
    pub worst_radius: f64,
    pub points: usize,
}

/// Radial samples `(ρ, f)` of a field and the extent they are trusted to.
fn radial_samples(f: &Field) -> (Vec<(f64, f64)>, f64) {
    match f.body() {
        Body::Radial(p) => (
            p.nodes().iter().copied().zip(p.values().iter().copied()).collect(),
            p.rho_max(),
        ),
        Body::Grid(g) => {
            let d = g.dim().d();
            let s = (0..g.len())
                .map(|i| {
                    let x = g.center(i);
                    ((0..d).map(|k| x[k] * x[k]).sum::<f64>().sqrt(), g.values()[i])
                })
                .collect();
            (s, g.r())
        }
        _ => {
            let rho_max = 1e3;
            let s = (0..400)
                .map(|i| {
                    let r = 1e-3 * (rho_max / 1e-3f64).powf(i as f64 / 399.0);
                    (r, f.value(&[r, 0.0, 0.0]))
                })
                .collect();
            (s, rho_max)
        }
    }
}

/// Least-squares fit of `log f` against `log c − (d/2) log(1 + a²ρ²)` over
/// radii with `f > 1e−3 max f` and `ρ < 0.9 ρ_max`.
pub fn fit_affine_profile(f: &Field) -> Result<AffineFit> {
    let d = f.dim().d() as f64;
    let (samples, rho_max) = radial_samples(f);
    let top = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(Error::Invalid(
            "fit window is empty: the field has no positive values".into(),
        ));
    }
    let window: Vec<(f64, f64)> = samples
        .into_iter()
        .filter(|(r, v)| *v > 1e-3 * top && *r < 0.9 * rho_max)
        .map(|(r, v)| (r * r, v.ln()))
        .collect();
    if window.len() < 3 {
        return Err(Error::Invalid(format!("fit window holds {} points", window.len())));
    }
    let n = window.len() as f64;
    // for fixed a the optimal log c is the mean residual
    let fit_at = |a: f64| {
        let a2 = a * a;
        let model = |r2: f64| -(d / 2.0) * (1.0 + a2 * r2).ln();
        let lc = window.iter().map(|(r2, lv)| lv - model(*r2)).sum::<f64>() / n;
        let res = window
            .iter()
            .map(|(r2, lv)| (lv - lc - model(*r2)).powi(2))
            .sum::<f64>();
        (res, lc)
    };
    let grid: Vec<f64> = (0..=400).map(|i| -6.0 + 12.0 * i as f64 / 400.0).collect();
    let best = grid
        .iter()
        .copied()
        .min_by(|x, y| fit_at(x.exp()).0.total_cmp(&fit_at(y.exp()).0))
        .unwrap();
    let step = 12.0 / 400.0;
    let la = golden_min(best - step, best + step, 1e-12, |t| fit_at(t.exp()).0);
    let a = la.exp();
    let lc = fit_at(a).1;
    let (mut dev, mut at) = (0.0, 0.0);
    for (r2, lv) in &window {
        let e = (lv - lc + (d / 2.0) * (1.0 + a * a * r2).ln()).exp() - 1.0;
        if e.abs() > dev {
            dev = e.abs();
            at = r2.sqrt();
        }
    }
    Ok(AffineFit {
        c: lc.exp(),
        a,
        max_deviation: dev,
        worst_radius: at,
        points: window.len(),
    })
}

/// `m(ρ) = ρ^d max_{|x|=ρ} f` on dyadic radii.
#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub radii: Vec<f64>,
    pub m: Vec<f64>,
    /// `m(ρ_{k+1}) / m(ρ_k)` over the last three radii.
    pub last_ratios: Vec<f64>,
    /// Both last ratios lie in `[0.8, 1.25]`.
    pub stable: bool,
    /// Fewer than three dyadic radii fit in the sampled extent.
    pub insufficient: bool,
}

impl TailReport {
    pub fn limit(&self) -> Option<f64> {
        self.m.last().copied()
    }
}

/// Dyadic radii `2^k`, `k ≥ 0`, up to `0.9 ρ_max` (grid half-width, radial
/// extent, or `2^12` for closed forms).
pub fn tail_decay_check(f: &Field) -> Result<TailReport> {
    let dim = f.dim();
    let d = dim.d() as i32;
    let rho_max = match f.body() {
        Body::Radial(p) => p.rho_max(),
        Body::Grid(g) => g.r(),
        _ => 4096.0 / 0.9,
    };
    let mut radii = Vec::new();
    let mut r = 1.0;
    while r <= 0.9 * rho_max {
        radii.push(r);
        r *= 2.0;
    }
    let dirs = make_direction_grid(dim, if d == 2 { 64 } else { 128 })?;
    let m: Vec<f64> = radii
        .iter()
        .map(|r| {
            let top = match f.as_radial() {
                Some(p) => p.value_at_radius(*r),
                None => dirs
                    .points()
                    .iter()
                    .map(|u| f.value(&[r * u[0], r * u[1], r * u[2]]))
                    .fold(f64::NEG_INFINITY, f64::max),
            };
            top * r.powi(d)
        })
        .collect();
    if radii.len() < 3 {
        log::warn!(
            "tail check: only {} dyadic radii fit in the extent {rho_max}",
            radii.len()
        );
        return Ok(TailReport {
            radii,
            m,
            last_ratios: Vec::new(),
            stable: false,
            insufficient: true,
        });
    }
    let k = m.len();
    let last_ratios: Vec<f64> = (k - 2..k).map(|i| m[i] / m[i - 1]).collect();
    let stable = m[k - 3..].iter().all(|v| *v > 0.0) && last_ratios.iter().all(|t| (0.8..=1.25).contains(t));
    Ok(TailReport {
        radii,
        m,
        last_ratios,
        stable,
        insufficient: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dim::Dimension;
    use crate::transforms::sample_grid;

    #[test]
    fn recovers_generating_parameters() {
        let f = sample_grid(&Field::extremizer(Dimension::TWO, 2.0, 3.0), 64, 8.0, false).unwrap();
        let fit = fit_affine_profile(&f).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-3 && (fit.c - 3.0).abs() < 1e-3, "{fit:?}");
        assert!(fit.max_deviation < 1e-3);
    }

    #[test]
    fn gaussian_does_not_fit() {
        let f = sample_grid(&Field::gaussian(Dimension::TWO, 1.0, 1.0), 64, 8.0, false).unwrap();
        assert!(fit_affine_profile(&f).unwrap().max_deviation > 0.1);
        assert!(fit_affine_profile(&Field::zero(Dimension::TWO)).is_err());
    }

    #[test]
    fn tail_limits() {
        let t = tail_decay_check(&Field::extremizer(Dimension::TWO, 1.0, 1.0)).unwrap();
        assert!(t.stable && (t.limit().unwrap() - 1.0).abs() < 1e-6);
        let g = tail_decay_check(&Field::gaussian(Dimension::TWO, 1.0, 1.0)).unwrap();
        assert!(!g.stable && g.limit().unwrap() < 1e-100);
        let small = sample_grid(&Field::extremizer(Dimension::TWO, 1.0, 1.0), 16, 2.0, false).unwrap();
        assert!(tail_decay_check(&small).unwrap().insufficient);
    }
}

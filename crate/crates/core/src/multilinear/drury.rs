//! Monte Carlo evaluation of the slice form
//! `∫ Δ'(x'_1..x'_d)^{-1} f_0(x'_0, v(x')·t) Π f_j(x'_j, t_j) dt dx'`.
//!
//! Points `x_1..x_d ∈ R^d` come from a symmetric anchor mixture: one slot
//! is drawn from a heavy-tailed radial law around the fields' center, the
//! others from the same law around the anchor. `x'_0` is then drawn from a
//! Cauchy law on the hyperplane through the points, centered at the foot of
//! the perpendicular from the center and shaped by the plane's metric
//! `I + u uᵀ`, which makes the weight bounded where `Δ'` is small but the
//! plane is steep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::simplex::edge_det;
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::grid::{Field, Point};

/// One Monte Carlo point.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilinearSample {
    /// `x_1, …, x_d ∈ R^d`.
    pub points: Vec<Point>,
    /// `(x'_0, v(x')·t)`, the point of the spanned hyperplane above `x'_0`.
    pub x0: Point,
    /// `Δ'(x'_1, …, x'_d)`.
    pub volume: f64,
    /// Proposal density of the whole configuration.
    pub density: f64,
    /// Integrand over density.
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DruryConfig {
    pub samples: usize,
    pub seed: u64,
    /// Median-of-means blocks; each block has its own random substream.
    pub blocks: usize,
    /// Tail index of the radial proposal `P(|y| > ρ) = (1 + ρ²/s²)^{−ν/2}`.
    pub tail_index: f64,
}

impl Default for DruryConfig {
    fn default() -> Self {
        DruryConfig {
            samples: 1_000_000,
            seed: 1,
            blocks: 16,
            tail_index: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DruryEstimate {
    /// Median of the block means.
    pub estimate: f64,
    /// `√(π/2) · sd / √n`, the asymptotic error of the median of means.
    pub standard_error: f64,
    pub mean: f64,
    pub samples: usize,
    pub rejected: usize,
    pub seed: u64,
}

impl DruryEstimate {
    pub fn rejection_fraction(&self) -> f64 {
        self.rejected as f64 / (self.samples + self.rejected).max(1) as f64
    }
}

/// Proposal for configurations around `center` with length scale `scale`.
#[derive(Clone, Debug)]
pub struct DrurySampler {
    dim: Dimension,
    center: Point,
    scale: f64,
    nu: f64,
}

impl DrurySampler {
    pub fn new(dim: Dimension, center: Point, scale: f64, tail_index: f64) -> Result<Self> {
        if !(scale > 0.0) || !(tail_index > 0.0) {
            return Err(Error::Invalid("sampler scale and tail index must be positive".into()));
        }
        Ok(DrurySampler {
            dim,
            center,
            scale,
            nu: tail_index,
        })
    }

    /// Sampler adapted to the fields' geometry hints.
    pub fn for_fields(fields: &[Field], tail_index: f64) -> Result<Self> {
        let dim = fields[0].dim();
        let mut center = [0.0; 3];
        let mut scale: f64 = 0.0;
        for f in fields {
            let g = f.geometry();
            for k in 0..dim.d() {
                center[k] += g.center[k] / fields.len() as f64;
            }
            scale = scale.max(g.scale);
        }
        let s = if scale.is_finite() && scale > 0.0 { scale } else { 1.0 };
        Self::new(dim, center, s, tail_index)
    }

    /// Density of the radial law at offset `y`.
    fn law_density(&self, y: &Point) -> f64 {
        let d = self.dim.d();
        let s = self.scale;
        let rho = (0..d).map(|k| y[k] * y[k]).sum::<f64>().sqrt();
        let base = 1.0 + rho * rho / (s * s);
        // radial density ν ρ/s² (1+ρ²/s²)^{−ν/2−1} spread over the sphere
        let h = base.powf(-self.nu / 2.0 - 1.0) * self.nu / (s * s);
        match d {
            2 => h / (2.0 * std::f64::consts::PI),
            _ => h / (4.0 * std::f64::consts::PI * rho.max(f64::MIN_POSITIVE)),
        }
    }

    fn law_draw(&self, rng: &mut impl Rng) -> Point {
        let d = self.dim.d();
        let u: f64 = 1.0 - rng.gen::<f64>();
        let rho = self.scale * (u.powf(-2.0 / self.nu) - 1.0).max(0.0).sqrt();
        let dir = unit_vector(rng, d);
        let mut y = [0.0; 3];
        for k in 0..d {
            y[k] = rho * dir[k];
        }
        y
    }

    /// Mixture density of `x_1..x_d` (offsets from the center).
    fn config_density(&self, ys: &[Point]) -> f64 {
        let d = self.dim.d();
        let mut q = 0.0;
        for a in 0..d {
            let mut term = self.law_density(&ys[a]);
            for j in (0..d).filter(|j| *j != a) {
                let mut rel = [0.0; 3];
                for k in 0..d {
                    rel[k] = ys[j][k] - ys[a][k];
                }
                term *= self.law_density(&rel);
            }
            q += term;
        }
        q / d as f64
    }

    /// Draws one configuration; `None` when `Δ'` falls below the degeneracy
    /// guard `1e−9 · scale^{d−1}`.
    pub fn draw(&self, fields: &[Field], rng: &mut impl Rng) -> Option<MultilinearSample> {
        let d = self.dim.d();
        let k = d - 1;
        let s = self.scale;
        let anchor = rng.gen_range(0..d);
        let mut ys = vec![[0.0; 3]; d];
        ys[anchor] = self.law_draw(rng);
        for j in (0..d).filter(|j| *j != anchor) {
            let off = self.law_draw(rng);
            for c in 0..d {
                ys[j][c] = ys[anchor][c] + off[c];
            }
        }
        let det = edge_det(&ys, d);
        let volume = det.abs() / if d == 3 { 2.0 } else { 1.0 };
        if !(volume >= 1e-9 * s.powi(k as i32)) {
            return None;
        }
        // hyperplane t = a + u·x' through the offsets
        let (u, a) = plane_through(&ys, d, det);
        let u2: f64 = u[..k].iter().map(|c| c * c).sum();
        let sq = (1.0 + u2).sqrt();
        let dist = a.abs() / sq;
        let sigma0 = s * (1.0 + dist * dist / (s * s)).sqrt();
        let mut foot = [0.0; 3];
        for c in 0..k {
            foot[c] = -a * u[c] / (1.0 + u2);
        }
        let (z, qz) = cauchy_draw(rng, k);
        // M = (I + uuᵀ)^{-1/2} = I + (1/sq − 1) ûûᵀ
        let mut x0 = [0.0; 3];
        let uz: f64 = (0..k).map(|c| u[c] * z[c]).sum();
        let coef = if u2 > 0.0 { (1.0 / sq - 1.0) / u2 } else { 0.0 };
        for c in 0..k {
            x0[c] = foot[c] + sigma0 * (z[c] + coef * uz * u[c]);
        }
        x0[k] = a + (0..k).map(|c| u[c] * x0[c]).sum::<f64>();
        let q0 = qz * sq / sigma0.powi(k as i32);
        let density = self.config_density(&ys) * q0;
        let shift = |y: &Point| {
            let mut x = *y;
            for c in 0..d {
                x[c] += self.center[c];
            }
            x
        };
        let points: Vec<Point> = ys.iter().map(shift).collect();
        let x0 = shift(&x0);
        let mut integrand = fields[0].value(&x0);
        for (j, p) in points.iter().enumerate() {
            if integrand == 0.0 {
                break;
            }
            integrand *= fields[j + 1].value(p);
        }
        let weight = if integrand == 0.0 {
            0.0
        } else {
            integrand / (volume * density)
        };
        Some(MultilinearSample {
            points,
            x0,
            volume,
            density,
            weight,
        })
    }
}

fn unit_vector(rng: &mut impl Rng, d: usize) -> Point {
    let mut v = [0.0; 3];
    if d == 2 {
        let phi = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
        v[0] = phi.cos();
        v[1] = phi.sin();
    } else {
        let z = 2.0 * rng.gen::<f64>() - 1.0;
        let phi = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
        let r = (1.0 - z * z).max(0.0).sqrt();
        v = [r * phi.cos(), r * phi.sin(), z];
    }
    v
}

/// Standard Cauchy point in `R^k` (`k = 1, 2`) and its density.
fn cauchy_draw(rng: &mut impl Rng, k: usize) -> ([f64; 2], f64) {
    use std::f64::consts::PI;
    if k == 1 {
        let z = (PI * (rng.gen::<f64>() - 0.5)).tan();
        ([z, 0.0], 1.0 / (PI * (1.0 + z * z)))
    } else {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let r = (u.powi(-2) - 1.0).max(0.0).sqrt();
        let phi = rng.gen::<f64>() * 2.0 * PI;
        ([r * phi.cos(), r * phi.sin()], (1.0 + r * r).powf(-1.5) / (2.0 * PI))
    }
}

/// `(u, a)` with `y_{j,d} = a + u·y'_j`; `det` is the edge determinant.
fn plane_through(ys: &[Point], d: usize, det: f64) -> ([f64; 2], f64) {
    if d == 2 {
        let u = (ys[0][1] - ys[1][1]) / (ys[0][0] - ys[1][0]);
        return ([u, 0.0], ys[0][1] - u * ys[0][0]);
    }
    // differences eliminate a; Cramer on the 2×2 system
    let (e1, e2) = (sub(&ys[1], &ys[0]), sub(&ys[2], &ys[0]));
    let u0 = (e1[2] * e2[1] - e2[2] * e1[1]) / det;
    let u1 = (e1[0] * e2[2] - e2[0] * e1[2]) / det;
    ([u0, u1], ys[0][2] - u0 * ys[0][0] - u1 * ys[0][1])
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Median-of-means estimate of the slice form with `fields = [f_0, …, f_d]`.
///
/// For the diagonal `f_j = f` the form equals `(d−1)! ‖ℛf‖_{d+1}^{d+1}` with
/// the sinogram normalization of [`crate::transforms::radon_norm`]: the
/// Jacobian of `y ↦ (y_d + x'_j·y')_j` is `(d−1)! Δ'`, not `Δ'`.
pub fn drury_form(fields: &[Field], samples: usize, seed: u64) -> Result<DruryEstimate> {
    drury_form_with(
        fields,
        &DruryConfig {
            samples,
            seed,
            ..DruryConfig::default()
        },
    )
}

pub fn drury_form_with(fields: &[Field], cfg: &DruryConfig) -> Result<DruryEstimate> {
    let Some(first) = fields.first() else {
        return Err(Error::Invalid("no fields given".into()));
    };
    let dim = first.dim();
    let d = dim.d();
    if fields.len() != d + 1 {
        return Err(Error::Invalid(format!("the form takes d + 1 = {} fields", d + 1)));
    }
    if fields.iter().any(|f| f.dim() != dim) {
        return Err(Error::Invalid("fields must share a dimension".into()));
    }
    if fields.iter().any(|f| !f.is_nonneg()) {
        return Err(Error::NegativeInput);
    }
    if cfg.blocks == 0 || cfg.samples < cfg.blocks {
        return Err(Error::Invalid("need at least one sample per block".into()));
    }
    if fields.iter().any(|f| f.is_zero()) {
        // exact: the integrand vanishes identically
        return Ok(DruryEstimate {
            estimate: 0.0,
            standard_error: 0.0,
            mean: 0.0,
            samples: 0,
            rejected: 0,
            seed: cfg.seed,
        });
    }
    let sampler = DrurySampler::for_fields(fields, cfg.tail_index)?;
    let per = cfg.samples / cfg.blocks;
    let extra = cfg.samples % cfg.blocks;
    let blocks: Vec<(f64, f64, usize, usize)> = (0..cfg.blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let n = per + usize::from(b < extra);
            let (mut sum, mut sum2, mut rejected) = (0.0, 0.0, 0usize);
            let mut got = 0;
            while got < n {
                match sampler.draw(fields, &mut rng) {
                    Some(s) => {
                        sum += s.weight;
                        sum2 += s.weight * s.weight;
                        got += 1;
                    }
                    None => rejected += 1,
                }
            }
            (sum, sum2, n, rejected)
        })
        .collect();
    let n: usize = blocks.iter().map(|b| b.2).sum();
    let sum: f64 = blocks.iter().map(|b| b.0).sum();
    let sum2: f64 = blocks.iter().map(|b| b.1).sum();
    let rejected = blocks.iter().map(|b| b.3).sum();
    let mean = sum / n as f64;
    let var = (sum2 / n as f64 - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0).max(1.0);
    let mut means: Vec<f64> = blocks.iter().map(|b| b.0 / b.2 as f64).collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = means.len();
    let estimate = if m % 2 == 1 {
        means[m / 2]
    } else {
        0.5 * (means[m / 2 - 1] + means[m / 2])
    };
    if !estimate.is_finite() {
        return Err(Error::Divergence("non-finite Monte Carlo estimate".into()));
    }
    Ok(DruryEstimate {
        estimate,
        standard_error: (std::f64::consts::FRAC_PI_2 * var / n as f64).sqrt(),
        mean,
        samples: n,
        rejected,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn extremizer_matches_radon_norm() {
        let f = Field::extremizer(Dimension::TWO, 1.0, 1.0);
        let est = drury_form(&[f.clone(), f.clone(), f], 200_000, 7).unwrap();
        let target = 2.0 * PI.powi(4);
        assert!((est.estimate - target).abs() < 4.0 * est.standard_error, "{est:?}");
        assert!(est.standard_error < 0.02 * target);
    }

    #[test]
    fn three_dimensional_form_carries_the_factorial() {
        // ‖ℛ⟨x⟩^{-3}‖_4^4 = ½ · 4π · (2π)^4 · π/2 = 16π⁶
        let f = Field::extremizer(Dimension::THREE, 1.0, 1.0);
        let est = drury_form(&[f.clone(), f.clone(), f.clone(), f], 200_000, 4).unwrap();
        let target = 2.0 * 16.0 * PI.powi(6);
        assert!(
            (est.estimate - target).abs() < 4.0 * est.standard_error,
            "{est:?} vs {target}"
        );
    }

    #[test]
    fn zero_slot_and_determinism() {
        let dim = Dimension::TWO;
        let f = Field::gaussian(dim, 1.0, 1.0);
        let z = drury_form(&[f.clone(), Field::zero(dim), f.clone()], 1000, 1).unwrap();
        assert_eq!(z.estimate, 0.0);
        let a = drury_form(&[f.clone(), f.clone(), f.clone()], 4000, 3).unwrap();
        let b = drury_form(&[f.clone(), f.clone(), f], 4000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn proposal_density_integrates_to_one() {
        // E_q[1/q · g] = ∫ g for a normalized test function g on (R^2)^2 × R
        let dim = Dimension::TWO;
        let sampler = DrurySampler::new(dim, [0.0; 3], 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = |x: &Point| (-(x[0] * x[0] + x[1] * x[1])).exp() / PI;
        let fields: Vec<Field> = vec![Field::gaussian(dim, 1.0, 1.0); 3];
        let mut acc = 0.0;
        let n = 200_000;
        for _ in 0..n {
            if let Some(s) = sampler.draw(&fields, &mut rng) {
                let x0 = s.x0[0];
                acc += g(&s.points[0]) * g(&s.points[1]) * (-x0 * x0).exp() / PI.sqrt() / s.density;
            }
        }
        let m = acc / n as f64;
        assert!((m - 1.0).abs() < 0.03, "{m}");
    }
}

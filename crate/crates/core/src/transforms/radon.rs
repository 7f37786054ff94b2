use std::io::Write;

use rayon::prelude::*;

use super::fiber::{integrate_over_sheet, support_ball, Sheet};
use super::TransformConfig;
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::grid::{make_direction_grid, DirectionGrid, Field, Point};
use crate::quad::{compensated_sum, integrate_piecewise, integrate_real_line, QuadSettings};

/// Sampling layout of a sinogram: cell-centered `r` on `[-R_s, R_s]` times
/// a direction grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SinogramLayout {
    nr: usize,
    rs: f64,
    directions: DirectionGrid,
}

impl SinogramLayout {
    pub fn new(nr: usize, rs: f64, directions: DirectionGrid) -> Result<Self> {
        if nr == 0 || !(rs > 0.0) {
            return Err(Error::Invalid("sinogram layout needs nr > 0 and R_s > 0".into()));
        }
        Ok(SinogramLayout { nr, rs, directions })
    }

    /// `nr` radii on `[-rs, rs]` and `ndirs` directions from the default rule.
    pub fn uniform(dim: Dimension, nr: usize, rs: f64, ndirs: usize) -> Result<Self> {
        SinogramLayout::new(nr, rs, make_direction_grid(dim, ndirs)?)
    }

    pub fn dim(&self) -> Dimension {
        self.directions.dim()
    }
    pub fn nr(&self) -> usize {
        self.nr
    }
    pub fn rs(&self) -> f64 {
        self.rs
    }
    pub fn hr(&self) -> f64 {
        2.0 * self.rs / self.nr as f64
    }
    pub fn r(&self, i: usize) -> f64 {
        -self.rs + (i as f64 + 0.5) * self.hr()
    }
    pub fn directions(&self) -> &DirectionGrid {
        &self.directions
    }
}

/// Values of ℛf on a layout, stored `r`-major: entry `(i, j)` is at
/// `i * ndirs + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    layout: SinogramLayout,
    values: Vec<f64>,
}

impl Sinogram {
    pub fn from_values(layout: SinogramLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.nr * layout.directions.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(
                "sinogram table must be finite and match the layout".into(),
            ));
        }
        Ok(Sinogram { layout, values })
    }

    pub fn layout(&self) -> &SinogramLayout {
        &self.layout
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn value(&self, ir: usize, idir: usize) -> f64 {
        self.values[ir * self.layout.directions.len() + idir]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let l = &self.layout;
        let d = l.dim().d();
        writeln!(w, "d,Nr,Rs,ndirs")?;
        writeln!(w, "{},{},{},{}", d, l.nr, l.rs, l.directions.len())?;
        let theta_cols: Vec<String> = (0..d).map(|k| format!("theta{k}")).collect();
        writeln!(w, "r_index,dir_index,r,{},value", theta_cols.join(","))?;
        for i in 0..l.nr {
            for (j, th) in l.directions.points().iter().enumerate() {
                let comps: Vec<String> = th[..d].iter().map(|c| format!("{c:e}")).collect();
                writeln!(w, "{},{},{:e},{},{:e}", i, j, l.r(i), comps.join(","), self.value(i, j))?;
            }
        }
        Ok(())
    }
}

/// Orthonormal basis of `θ^⊥`: Gram–Schmidt on the coordinate axes other
/// than the one where `|θ_k|` is largest, in increasing order.
pub fn hyperplane_frame(theta: &Point, d: usize) -> [Point; 2] {
    let kmax = (0..d)
        .max_by(|a, b| theta[*a].abs().partial_cmp(&theta[*b].abs()).unwrap())
        .unwrap();
    let mut frame = [[0.0; 3]; 2];
    for (m, axis) in (0..d).filter(|k| *k != kmax).enumerate() {
        let mut v = [0.0; 3];
        v[axis] = 1.0;
        let mut basis: Vec<Point> = vec![*theta];
        basis.extend_from_slice(&frame[..m]);
        for b in &basis {
            let c: f64 = (0..d).map(|k| v[k] * b[k]).sum();
            for k in 0..d {
                v[k] -= c * b[k];
            }
        }
        let n = (0..d).map(|k| v[k] * v[k]).sum::<f64>().sqrt();
        for vk in v.iter_mut().take(d) {
            *vk /= n;
        }
        frame[m] = v;
    }
    frame
}

/// `ℛf(r, θ)`.
pub fn radon_at(f: &Field, r: f64, theta: &Point, cfg: &TransformConfig) -> f64 {
    let d = f.dim().d();
    let frame = hyperplane_frame(theta, d);
    let sheet = Sheet::hyperplane(r, theta, &frame, d);
    integrate_over_sheet(&cfg.source(f), &sheet, &cfg.quad)
}

/// Samples ℛf on every `(r, θ)` of the layout.
pub fn radon(f: &Field, layout: &SinogramLayout, cfg: &TransformConfig) -> Result<Sinogram> {
    if layout.dim() != f.dim() {
        return Err(Error::Invalid(
            "sinogram layout dimension differs from the field".into(),
        ));
    }
    let nd = layout.directions.len();
    let src = cfg.source(f);
    let values: Vec<f64> = (0..layout.nr * nd)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nd, idx % nd);
            radon_at(&src, layout.r(i), &layout.directions.points()[j], cfg)
        })
        .collect();
    Sinogram::from_values(layout.clone(), values)
}

/// `(½ Σ |v|^q h_r w_θ)^{1/q}`.
pub fn sinogram_norm(s: &Sinogram, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Exponent(q));
    }
    let l = &s.layout;
    let w = l.directions.weights();
    let nd = w.len();
    let total = compensated_sum(
        s.values
            .iter()
            .enumerate()
            .map(|(idx, v)| v.abs().powf(q) * w[idx % nd]),
    );
    Ok((0.5 * total * l.hr()).powf(1.0 / q))
}

/// `‖ℛf‖_q` with `½ dr dθ`, by quadrature in `r` for each direction and
/// direction refinement until the estimate settles.
pub fn radon_norm(f: &Field, q: f64, cfg: &TransformConfig) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Exponent(q));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let src = cfg.source(f);
    let total = sphere_integral(f.dim(), cfg, |theta| radon_power_line(&src, theta, q, cfg))?;
    Ok((0.5 * total).powf(1.0 / q))
}

/// `∫_{S^{d-1}} φ(θ) dθ`: periodic trapezoid on the circle or a Gauss
/// product rule on the sphere, refined by doubling until two estimates
/// agree to the configured tolerance.
pub(crate) fn sphere_integral<F>(dim: Dimension, cfg: &TransformConfig, layer: F) -> Result<f64>
where
    F: Fn(&Point) -> f64 + Sync,
{
    let tol = cfg.direction_tol();
    let est = match dim.d() {
        2 => {
            let mut m = cfg.min_directions.max(8);
            let angle = |k: usize, m: usize| 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            let mut sum: f64 = (0..m)
                .into_par_iter()
                .map(|k| {
                    let a = angle(k, m);
                    layer(&[a.cos(), a.sin(), 0.0])
                })
                .collect::<Vec<f64>>()
                .into_iter()
                .sum();
            let mut est = sum * 2.0 * std::f64::consts::PI / m as f64;
            while 2 * m <= cfg.max_directions {
                let add: f64 = (0..m)
                    .into_par_iter()
                    .map(|k| {
                        let a = angle(2 * k + 1, 2 * m);
                        layer(&[a.cos(), a.sin(), 0.0])
                    })
                    .collect::<Vec<f64>>()
                    .into_iter()
                    .sum();
                sum += add;
                m *= 2;
                let next = sum * 2.0 * std::f64::consts::PI / m as f64;
                let done = (next - est).abs() <= tol * next.abs();
                est = next;
                if done {
                    break;
                }
            }
            est
        }
        _ => {
            let mut n = (cfg.min_directions as f64 / 2.0).sqrt().ceil().max(4.0) as usize;
            let eval = |n: usize| -> Result<f64> {
                let g = DirectionGrid::gauss_product(n)?;
                let parts: Vec<f64> = g
                    .points()
                    .par_iter()
                    .zip(g.weights().par_iter())
                    .map(|(p, w)| w * layer(p))
                    .collect();
                Ok(compensated_sum(parts))
            };
            let mut est = eval(n)?;
            while 2 * (2 * n) * (2 * n) <= cfg.max_directions {
                n *= 2;
                let next = eval(n)?;
                let done = (next - est).abs() <= tol * next.abs();
                est = next;
                if done {
                    break;
                }
            }
            est
        }
    };
    Ok(est)
}

/// `∫ |ℛf(r, θ)|^q dr` for one direction.
fn radon_power_line(f: &Field, theta: &Point, q: f64, cfg: &TransformConfig) -> f64 {
    let d = f.dim().d();
    let g = f.geometry();
    let center: f64 = (0..d).map(|k| g.center[k] * theta[k]).sum();
    let integrand = |r: f64| {
        let v = radon_at(f, r, theta, cfg);
        if v == 0.0 {
            0.0
        } else {
            v.abs().powf(q)
        }
    };
    let outer = cfg.outer_quad();
    match support_ball(f) {
        Some((c, rho)) => {
            let rc: f64 = (0..d).map(|k| c[k] * theta[k]).sum();
            integrate_piecewise(integrand, rc, rho, &[], Some((rc - rho, rc + rho)), &outer)
        }
        None => integrate_real_line(integrand, center, g.scale, &outer),
    }
}

impl TransformConfig {
    fn direction_tol(&self) -> f64 {
        (self.quad.tol * 10.0).max(1e-13)
    }

    fn outer_quad(&self) -> QuadSettings {
        self.quad
    }
}

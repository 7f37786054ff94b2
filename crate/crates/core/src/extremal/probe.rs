use crate::error::{Error, Result};
use crate::grid::{lp_norm_with, Field};
use crate::transforms::TransformConfig;

use super::functional::phi_radon;

/// Second-order fit `Φ(f + εg) − Φ(f) ≈ αε + βε²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub phi0: f64,
    /// Steps actually evaluated, with their `Φ(f + εg)`.
    pub eps: Vec<f64>,
    pub phis: Vec<f64>,
    /// Steps dropped because `f + εg` went negative.
    pub skipped: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

/// Lowest value of `f + εg` seen on a lattice over the support of `g`.
fn min_on_support(f: &Field, g: &Field, eps: f64) -> f64 {
    if eps >= 0.0 && f.is_nonneg() && g.is_nonneg() || eps <= 0.0 && f.is_nonneg() && g.is_zero() {
        return 0.0;
    }
    let d = f.dim().d();
    let bx = g.support_box().unwrap_or([(-4.0, 4.0); 3]);
    let n: usize = if d == 2 { 81 } else { 25 };
    let mut lo = f64::INFINITY;
    let total = n.pow(d as u32);
    for i in 0..total {
        let mut x = [0.0; 3];
        let mut k = i;
        for (j, c) in x.iter_mut().enumerate().take(d) {
            let t = (k % n) as f64 / (n - 1) as f64;
            k /= n;
            *c = bx[j].0 + t * (bx[j].1 - bx[j].0);
        }
        lo = lo.min(f.value(&x) + eps * g.value(&x));
    }
    lo
}

/// Least squares for `y = αε + βε²`.
fn fit_quadratic(eps: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let (mut s2, mut s3, mut s4, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (e, v) in eps.iter().zip(y) {
        s2 += e * e;
        s3 += e * e * e;
        s4 += e * e * e * e;
        b1 += e * v;
        b2 += e * e * v;
    }
    let det = s2 * s4 - s3 * s3;
    if eps.len() < 2 || !(det.abs() > 1e-12 * s2 * s4) {
        return Err(Error::Invalid(
            "stationarity fit needs two distinct nonzero steps".into(),
        ));
    }
    Ok(((b1 * s4 - b2 * s3) / det, (s2 * b2 - s3 * b1) / det))
}

/// Evaluates `Φ_R(f + εg)` on the closed-form path with `g` rescaled to
/// `‖g‖_p = ‖f‖_p`, so `ε` is a relative step.
pub fn stationarity_probe(f: &Field, g: &Field, eps: &[f64], cfg: &TransformConfig) -> Result<ProbeReport> {
    if f.dim() != g.dim() {
        return Err(Error::Invalid("dimension mismatch between f and g".into()));
    }
    if g.is_zero() {
        return Err(Error::ZeroField);
    }
    let p = f.dim().p();
    let nf = lp_norm_with(f, p, &cfg.quad)?;
    let ng = lp_norm_with(g, p, &cfg.quad)?;
    if !(ng > 0.0) {
        return Err(Error::ZeroField);
    }
    let g = g.scaled(nf / ng);
    let phi0 = phi_radon(f, cfg)?.phi;
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    let mut phis = Vec::new();
    let mut diffs = Vec::new();
    for &e in eps {
        if e == 0.0 {
            continue;
        }
        if min_on_support(f, &g, e) < 0.0 {
            log::warn!("f + {e} g is negative somewhere; step skipped");
            skipped.push(e);
            continue;
        }
        let phi = phi_radon(&f.perturbed(&g, e)?, cfg)?.phi;
        used.push(e);
        phis.push(phi);
        diffs.push(phi - phi0);
    }
    let (alpha, beta) = fit_quadratic(&used, &diffs)?;
    Ok(ProbeReport {
        phi0,
        eps: used,
        phis,
        skipped,
        alpha,
        beta,
    })
}

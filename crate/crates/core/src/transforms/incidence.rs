use super::radon::{radon_at, sphere_integral};
use super::TransformConfig;
use crate::error::{Error, Result};
use crate::grid::{integrate_over_space, norm2, Field, Point};
use crate::quad::{integrate_interval, integrate_lower, integrate_upper};

/// `(2ε)^{-1} ∬ 1_{|x·y − 1| < ε} f(x) h(y) dx dy`.
///
/// For each `y` the inner integral over the slab is `∫ ℛf(t, y/|y|) dt` over
/// `t ∈ ((1−ε)/|y|, (1+ε)/|y|)`, so the slab is integrated exactly in its
/// normal direction rather than through an indicator.
pub fn incidence_form(f: &Field, h: &Field, eps: f64, cfg: &TransformConfig) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Invalid(format!("incidence width must be positive, got {eps}")));
    }
    if f.dim() != h.dim() {
        return Err(Error::Invalid("incidence form needs fields of one dimension".into()));
    }
    if f.is_zero() || h.is_zero() {
        return Ok(0.0);
    }
    let d = f.dim().d();
    let inner = cfg.quad.inner();
    let slab_cfg = TransformConfig {
        quad: inner.inner(),
        ..*cfg
    };
    let slab = |y: &Point| -> f64 {
        let rho = norm2(y, d).sqrt();
        if rho == 0.0 {
            return 0.0;
        }
        let mut theta = [0.0; 3];
        for k in 0..d {
            theta[k] = y[k] / rho;
        }
        integrate_interval(
            |t| radon_at(f, t, &theta, &slab_cfg),
            (1.0 - eps) / rho,
            (1.0 + eps) / rho,
            &inner,
        )
    };
    let total = integrate_over_space(
        f.dim(),
        &h.geometry(),
        &[h],
        |y| {
            let hv = h.value(y);
            if hv == 0.0 {
                0.0
            } else {
                hv * slab(y)
            }
        },
        &cfg.quad,
    );
    Ok(total / (2.0 * eps))
}

/// Incidence values at three widths and their extrapolation to `ε → 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct IncidenceReport {
    pub eps: [f64; 3],
    pub values: [f64; 3],
    /// Constant term of the quadratic through the three points.
    pub extrapolated: f64,
}

/// Richardson extrapolation of [`incidence_form`] with `a + b ε + c ε²`.
pub fn incidence_limit(f: &Field, h: &Field, eps: [f64; 3], cfg: &TransformConfig) -> Result<IncidenceReport> {
    if eps[0] == eps[1] || eps[1] == eps[2] || eps[0] == eps[2] {
        return Err(Error::Invalid("extrapolation needs three distinct widths".into()));
    }
    let mut values = [0.0; 3];
    for (v, e) in values.iter_mut().zip(eps) {
        *v = incidence_form(f, h, e, cfg)?;
    }
    // Lagrange interpolation evaluated at ε = 0.
    let mut a = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= eps[j] / (eps[j] - eps[i]);
            }
        }
        a += w * values[i];
    }
    Ok(IncidenceReport {
        eps,
        values,
        extrapolated: a,
    })
}

/// `H(r, θ) = r^{-d} h(θ / r)`, taken literally for negative `r`; zero at `r = 0`.
pub fn incidence_density(h: &Field) -> impl Fn(f64, &Point) -> f64 + '_ {
    let d = h.dim().d();
    move |r: f64, theta: &Point| {
        if r == 0.0 {
            return 0.0;
        }
        let mut y = [0.0; 3];
        for k in 0..d {
            y[k] = theta[k] / r;
        }
        let v = h.value(&y);
        if v == 0.0 {
            0.0
        } else {
            v * r.powi(-(d as i32))
        }
    }
}

/// `∫_{S^{d-1}} ∫_0^∞ ℛf(r, θ) H(r, θ) dr dθ`.
pub fn incidence_pairing(f: &Field, h: &Field, cfg: &TransformConfig) -> Result<f64> {
    let hd = incidence_density(h);
    let inner = TransformConfig {
        quad: cfg.quad.inner(),
        ..*cfg
    };
    sphere_integral(f.dim(), cfg, |theta| {
        integrate_upper(
            |r| {
                let hv = hd(r, theta);
                if hv == 0.0 {
                    0.0
                } else {
                    hv * radon_at(f, r, theta, &inner)
                }
            },
            0.0,
            1.0,
            &cfg.quad,
        )
    })
}

/// `(½ ∫_{S^{d-1}} ∫_R |H|^p dr dθ)^{1/p}`, integrated on both half-lines.
pub fn incidence_density_norm(h: &Field, p: f64, cfg: &TransformConfig) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Exponent(p));
    }
    let hd = incidence_density(h);
    let pw = |r: f64, th: &Point| {
        let v = hd(r, th);
        if v == 0.0 {
            0.0
        } else {
            v.abs().powf(p)
        }
    };
    let total = sphere_integral(h.dim(), cfg, |theta| {
        integrate_upper(|r| pw(r, theta), 0.0, 1.0, &cfg.quad) + integrate_lower(|r| pw(r, theta), 0.0, 1.0, &cfg.quad)
    })?;
    Ok((0.5 * total).powf(1.0 / p))
}

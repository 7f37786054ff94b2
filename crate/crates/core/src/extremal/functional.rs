use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::grid::{lp_norm_with, Body, Field, RadialProfile};
use crate::quad::{compensated_sum, integrate_interval, QuadSettings};
use crate::transforms::{cconv, radon_norm, TransformConfig};

/// `Φ = numerator / denominator` with where and how it was computed.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalReport {
    pub numerator: f64,
    pub denominator: f64,
    pub phi: f64,
    /// Evaluation path, e.g. `"closed-form quadrature"`.
    pub method: &'static str,
    /// Lattice or layout description of the input.
    pub provenance: String,
    pub runtime: Duration,
}

fn provenance(f: &Field) -> String {
    match f.body() {
        Body::Grid(g) => format!(
            "grid d={} N={} R={}{}",
            g.dim().d(),
            g.n(),
            g.r(),
            if g.exterior().is_some() { " +exterior" } else { "" }
        ),
        Body::Radial(p) => format!("radial d={} cells={} rho_max={}", p.dim().d(), p.len(), p.rho_max()),
        _ => format!("closed-form d={}", f.dim().d()),
    }
}

fn method(f: &Field) -> &'static str {
    match f.body() {
        Body::Grid(_) => "grid midpoint",
        Body::Radial(_) => "radial step profile (exact kernel)",
        _ => "closed-form quadrature",
    }
}

fn check(f: &Field) -> Result<()> {
    if f.is_zero() {
        return Err(Error::ZeroField);
    }
    if !f.is_nonneg() {
        log::warn!("functional of a field that may take negative values");
    }
    Ok(())
}

/// `Φ_R(f) = ‖ℛf‖_{d+1} / ‖f‖_{(d+1)/d}`.
pub fn phi_radon(f: &Field, cfg: &TransformConfig) -> Result<FunctionalReport> {
    check(f)?;
    let t0 = Instant::now();
    let dim = f.dim();
    let (num, den) = match f.as_radial() {
        Some(p) => (radial_radon_norm(p, &cfg.quad), p.lp_norm(dim.p())),
        None => (radon_norm(f, dim.q(), cfg)?, lp_norm_with(f, dim.p(), &cfg.quad)?),
    };
    report(f, num, den, t0)
}

/// `Φ_C(f) = ‖𝒞f‖_{d+1} / ‖f‖_{(d+1)/d}`.
pub fn phi_conv(f: &Field, cfg: &TransformConfig) -> Result<FunctionalReport> {
    check(f)?;
    let t0 = Instant::now();
    let dim = f.dim();
    let cf = cconv(f, cfg);
    let num = lp_norm_with(&cf, dim.q(), &cfg.quad)?;
    let den = lp_norm_with(f, dim.p(), &cfg.quad)?;
    report(f, num, den, t0)
}

fn report(f: &Field, num: f64, den: f64, t0: Instant) -> Result<FunctionalReport> {
    if !(den > 0.0) || !num.is_finite() {
        return Err(Error::Divergence(format!("norms {num} / {den}")));
    }
    Ok(FunctionalReport {
        numerator: num,
        denominator: den,
        phi: num / den,
        method: method(f),
        provenance: provenance(f),
        runtime: t0.elapsed(),
    })
}

/// `ℛ 1_{B_b}(r)`, the `(d−1)`-volume of a hyperplane section of a ball.
#[inline]
pub(crate) fn ball_section(b: f64, r: f64, d: usize) -> f64 {
    let s = b * b - r * r;
    if s <= 0.0 {
        return 0.0;
    }
    if d == 2 {
        2.0 * s.sqrt()
    } else {
        std::f64::consts::PI * s
    }
}

/// `ℛf(r)` of the step profile, exactly.
pub(crate) fn radial_radon_at(p: &RadialProfile, r: f64) -> f64 {
    let d = p.dim().d();
    let e = p.edges();
    let v = p.values();
    let mut acc = 0.0;
    // shells with outer edge below r do not meet the hyperplane
    let start = e.partition_point(|x| *x <= r.abs()).saturating_sub(1);
    for i in start..v.len() {
        if v[i] != 0.0 {
            acc += v[i] * (ball_section(e[i + 1], r, d) - ball_section(e[i], r, d));
        }
    }
    acc
}

/// `‖ℛf‖_{d+1}` of the step profile: `|S^{d−1}| ∫_0^∞ |ℛf|^q dr`, integrated
/// cell by cell with tanh-sinh (square-root edges in `d = 2`).
pub(crate) fn radial_radon_norm(p: &RadialProfile, quad: &QuadSettings) -> f64 {
    let dim = p.dim();
    let q = dim.q();
    let e = p.edges();
    let s = QuadSettings {
        tol: quad.tol.max(1e-12),
        ..*quad
    };
    let parts = (0..p.len()).map(|k| integrate_interval(|r| radial_radon_at(p, r).abs().powf(q), e[k], e[k + 1], &s));
    (dim.sphere_area() * compensated_sum(parts)).powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dim::Dimension;
    use std::f64::consts::PI;

    fn target() -> f64 {
        2f64.powf(-1.0 / 3.0) * PI.powf(2.0 / 3.0)
    }

    #[test]
    fn extremizer_constant() {
        let f = Field::extremizer(Dimension::TWO, 1.0, 1.0);
        let rep = phi_radon(&f, &TransformConfig::default()).unwrap();
        assert!((rep.phi - target()).abs() < 1e-8 * target(), "{rep:?}");
        assert!((rep.numerator.powi(3) - 2.0 * PI.powi(4)).abs() < 1e-7 * rep.numerator.powi(3));
        assert!(phi_radon(&Field::zero(Dimension::TWO), &TransformConfig::default()).is_err());
    }

    #[test]
    fn scale_invariance() {
        let cfg = TransformConfig::default();
        let f = Field::gaussian(Dimension::TWO, 1.3, 1.0);
        let a = phi_radon(&f, &cfg).unwrap().phi;
        let b = phi_radon(&f.scaled(7.5), &cfg).unwrap().phi;
        assert!((a - b).abs() < 1e-9 * a);
        assert!(a < target());
    }

    #[test]
    fn radial_ball_section_matches_closed_form() {
        // a fine step profile of ⟨x⟩^{-2} approaches the continuum value
        let dim = Dimension::TWO;
        let layout = RadialProfile::sinh_layout(dim, 2048, 0.01, 1e5).unwrap();
        let vals: Vec<f64> = layout.nodes().iter().map(|r| 1.0 / (1.0 + r * r)).collect();
        let p = layout.with_values(vals).unwrap();
        for r in [0.0f64, 0.5, 2.0, 10.0] {
            let want = PI / (1.0 + r * r).sqrt();
            assert!((radial_radon_at(&p, r) - want).abs() < 2e-3 * want, "r = {r}");
        }
        let rep = phi_radon(&Field::from_radial(p), &TransformConfig::default()).unwrap();
        assert!((rep.phi - target()).abs() < 2e-3 * target(), "{rep:?}");
    }

    #[test]
    fn conv_of_parabolic_extremizer() {
        let f = Field::parabolic_extremizer(Dimension::TWO, 1.0);
        let cfg = TransformConfig::with_quad(QuadSettings::with_tol(1e-6));
        let rep = phi_conv(&f, &cfg).unwrap();
        assert!((rep.phi - target()).abs() < 1e-3 * target(), "{rep:?}");
    }
}

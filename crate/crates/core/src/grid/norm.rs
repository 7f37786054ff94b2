use super::{Body, Field, Geometry, Point};
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::quad::{compensated_sum, integrate_piecewise, QuadSettings};

/// `‖f‖_p` with default quadrature settings.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    lp_norm_with(f, p, &QuadSettings::default())
}

/// `‖f‖_p`. Grids use the midpoint rule (plus the exterior fallback, if any,
/// integrated outside the box); radial profiles are exact; everything else
/// goes through nested double-exponential quadrature.
pub fn lp_norm_with(f: &Field, p: f64, s: &QuadSettings) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Exponent(p));
    }
    let v = match f.body() {
        Body::Zero => 0.0,
        Body::Radial(r) => r.lp_norm(p),
        Body::Scaled { inner, factor } => factor.abs() * lp_norm_with(inner, p, s)?,
        _ => power_integral(f, p, s).powf(1.0 / p),
    };
    Ok(v)
}

/// `∫ |f|^p` over `R^d`.
fn power_integral(f: &Field, p: f64, s: &QuadSettings) -> f64 {
    let pw = |v: f64| if v == 0.0 { 0.0 } else { v.abs().powf(p) };
    match f.body() {
        Body::Grid(g) => {
            let inside = compensated_sum(g.values().iter().map(|v| pw(*v))) * g.cell_volume();
            let outside = match g.exterior() {
                Some(e) => integrate_over_space(
                    f.dim(),
                    &e.geometry(),
                    &[f, e],
                    |x| if g.contains(x) { 0.0 } else { pw(e.value(x)) },
                    s,
                ),
                None => 0.0,
            };
            inside + outside
        }
        _ if f.has_fiber() => {
            // fiber values lose their accuracy far out; the |x|^{-d-1} tail
            // beyond 1e7 scale lengths is below 1e-7 relative
            let near = QuadSettings {
                far: s.far.min(1e7),
                ..*s
            };
            integrate_over_space(f.dim(), &f.geometry(), &[f], |x| pw(f.value(x)), &near)
        }
        _ => integrate_over_space(f.dim(), &f.geometry(), &[f], |x| pw(f.value(x)), s),
    }
}

/// `∫ f` over `R^d` (signed).
pub fn integrate_field(f: &Field, s: &QuadSettings) -> f64 {
    match f.body() {
        Body::Zero => 0.0,
        Body::Radial(r) => compensated_sum(r.values().iter().zip(r.shell_measures()).map(|(v, w)| v * w)),
        Body::Scaled { inner, factor } => factor * integrate_field(inner, s),
        Body::Grid(g) => {
            let inside = compensated_sum(g.values().iter().copied()) * g.cell_volume();
            let outside = match g.exterior() {
                Some(e) => integrate_over_space(
                    f.dim(),
                    &e.geometry(),
                    &[f, e],
                    |x| if g.contains(x) { 0.0 } else { e.value(x) },
                    s,
                ),
                None => 0.0,
            };
            inside + outside
        }
        _ => integrate_over_space(f.dim(), &f.geometry(), &[f], |x| f.value(x), s),
    }
}

/// Nested quadrature of `g` over `R^d` in the sheared coordinates
/// `x_d = w + ridge(x')` of `geom`. Jumps and support bounds are collected
/// from `fields`; an axis is only bounded when every field has a bounded box.
pub fn integrate_over_space<G: Fn(&Point) -> f64>(
    dim: Dimension,
    geom: &Geometry,
    fields: &[&Field],
    g: G,
    s: &QuadSettings,
) -> f64 {
    let d = dim.d();
    let sbox = union_box(fields, d);
    let mut axis_breaks: [Vec<f64>; 3] = Default::default();
    for (k, ab) in axis_breaks.iter_mut().enumerate().take(d - 1) {
        for f in fields {
            f.axis_breaks(k, ab);
        }
    }
    let inner = s.inner();
    let innermost = inner.inner();

    let line = |x: &Point, q: &QuadSettings| -> f64 {
        let mut o = *x;
        let ridge = geom.ridge(x, d);
        o[d - 1] = ridge;
        let mut u = [0.0; 3];
        u[d - 1] = 1.0;
        let mut br = Vec::new();
        for f in fields {
            f.line_breaks(&o, &u, &mut br);
        }
        let bounds = sbox.map(|b| (b[d - 1].0 - ridge, b[d - 1].1 - ridge));
        let mut off = 0.0;
        for k in 0..d - 1 {
            off += (x[k] - geom.center[k]).powi(2);
        }
        let scale = geom.scale + off.sqrt();
        integrate_piecewise(
            |w| {
                let mut y = o;
                y[d - 1] = ridge + w;
                g(&y)
            },
            0.0,
            scale,
            &br,
            bounds,
            q,
        )
    };

    let b0 = sbox.map(|b| b[0]);
    if d == 2 {
        integrate_piecewise(
            |x0| line(&[x0, 0.0, 0.0], &inner),
            geom.center[0],
            geom.scale,
            &axis_breaks[0],
            b0,
            s,
        )
    } else {
        let b1 = sbox.map(|b| b[1]);
        integrate_piecewise(
            |x0| {
                let sc = geom.scale + (x0 - geom.center[0]).abs();
                integrate_piecewise(
                    |x1| line(&[x0, x1, 0.0], &innermost),
                    geom.center[1],
                    sc,
                    &axis_breaks[1],
                    b1,
                    &inner,
                )
            },
            geom.center[0],
            geom.scale,
            &axis_breaks[0],
            b0,
            s,
        )
    }
}

fn union_box(fields: &[&Field], d: usize) -> Option<[(f64, f64); 3]> {
    // Hull of the supports; unbounded as soon as one field is.
    let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    for f in fields {
        let fb = f.support_box()?;
        for k in 0..d {
            b[k].0 = b[k].0.min(fb[k].0);
            b[k].1 = b[k].1.max(fb[k].1);
        }
    }
    Some(b)
}

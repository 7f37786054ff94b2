//! Fiber integrals `∫_{R^{d-1}} f(P(τ)) dτ` over the affine or parabolic
//! sheets behind ℛ, ℛ♯, 𝒞 and their adjoints.

use crate::grid::curve::Curve;
use crate::grid::{Body, FiberOp, Field, Geometry, GridData, Point};
use crate::poly::Poly;
use crate::quad::{integrate_piecewise, QuadSettings};

/// `τ ↦ o + Σ_k τ_k u_k + q |τ|² e_d` for `τ ∈ R^{d-1}`, with unit Jacobian
/// in the horizontal coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Sheet {
    pub d: usize,
    pub o: Point,
    pub u: [Point; 2],
    pub q: f64,
}

impl Sheet {
    pub fn for_op(op: FiberOp, x: &Point, d: usize) -> Sheet {
        let mut o = *x;
        let mut u = [[0.0; 3]; 2];
        let mut q = 0.0;
        for k in 0..d - 1 {
            match op {
                FiberOp::Flat => {
                    o[k] = 0.0;
                    u[k][k] = 1.0;
                    u[k][d - 1] = x[k];
                }
                FiberOp::FlatAdjoint => {
                    o[k] = 0.0;
                    u[k][k] = 1.0;
                    u[k][d - 1] = -x[k];
                }
                FiberOp::Conv => {
                    u[k][k] = -1.0;
                    q = -0.5;
                }
                FiberOp::ConvAdjoint => {
                    u[k][k] = 1.0;
                    q = 0.5;
                }
            }
        }
        Sheet { d, o, u, q }
    }

    /// Hyperplane `{x·θ = r}` through the foot point `rθ` with an
    /// orthonormal frame of `θ^⊥`.
    pub fn hyperplane(r: f64, theta: &Point, frame: &[Point; 2], d: usize) -> Sheet {
        let mut o = [0.0; 3];
        for k in 0..d {
            o[k] = r * theta[k];
        }
        Sheet {
            d,
            o,
            u: *frame,
            q: 0.0,
        }
    }

    #[inline]
    pub fn at(&self, t: &[f64; 2]) -> Point {
        let mut p = self.o;
        let mut t2 = 0.0;
        for (j, tj) in t.iter().enumerate().take(self.d - 1) {
            for k in 0..self.d {
                p[k] += tj * self.u[j][k];
            }
            t2 += tj * tj;
        }
        p[self.d - 1] += self.q * t2;
        p
    }

    /// The one-parameter curve in `τ_{d-2}` with the leading parameter
    /// (if any) fixed at `t0`.
    pub fn curve(&self, t0: f64) -> Curve {
        let d = self.d;
        let mut w = [0.0; 3];
        w[d - 1] = self.q;
        if d == 2 {
            return Curve {
                o: self.o,
                u: self.u[0],
                w,
            };
        }
        let mut o = self.o;
        for k in 0..d {
            o[k] += t0 * self.u[0][k];
        }
        o[d - 1] += self.q * t0 * t0;
        Curve { o, u: self.u[1], w }
    }

    /// True when the horizontal part is `τ ↦ o' ± τ` coordinatewise.
    fn axis_aligned(&self) -> bool {
        let d = self.d;
        (0..d - 1).all(|j| {
            (0..d - 1).all(|k| {
                if j == k {
                    self.u[j][k].abs() == 1.0
                } else {
                    self.u[j][k] == 0.0
                }
            })
        })
    }
}

/// Integral of `f` over the sheet.
pub(crate) fn integrate_over_sheet(f: &Field, sheet: &Sheet, quad: &QuadSettings) -> f64 {
    match f.body() {
        Body::Zero => 0.0,
        Body::Grid(g) => grid_sheet(g, sheet, quad),
        Body::Scaled { inner, factor } => factor * integrate_over_sheet(inner, sheet, quad),
        _ => closed_sheet(f, sheet, None, quad),
    }
}

/// Value of a lazily attached fiber transform at `x`.
pub fn fiber_value(op: FiberOp, inner: &Field, x: &Point, quad: &QuadSettings) -> f64 {
    let sheet = Sheet::for_op(op, x, inner.dim().d());
    integrate_over_sheet(inner, &sheet, quad)
}

// ---- grid-backed integrands ----------------------------------------------

/// Midpoint rule with spacing `h` over the box, plus (for `d = 2`) the
/// exterior fallback integrated over the parts of the sheet outside it.
fn grid_sheet(g: &GridData, s: &Sheet, quad: &QuadSettings) -> f64 {
    let d = s.d;
    let inside = if s.axis_aligned() {
        column_sum(g, s)
    } else if d == 2 {
        line_midpoint(g, &s.curve(0.0))
    } else {
        plane_lattice(g, s)
    };
    let outside = match (g.exterior(), d) {
        (Some(e), 2) => closed_sheet(e, s, Some(g.r()), quad),
        _ => 0.0,
    };
    inside + outside
}

/// Sheets whose horizontal part hits every lattice column at its center:
/// only a linear interpolation along the last axis is needed.
fn column_sum(g: &GridData, s: &Sheet) -> f64 {
    let d = s.d;
    let n = g.n();
    let (r, h) = (g.r(), g.h());
    let vals = g.values();
    let ncols = n.pow(d as u32 - 1);
    let mut acc = 0.0;
    for col in 0..ncols {
        let (mut rem, mut t2, mut pd, mut slope) = (col, 0.0, s.o[d - 1], 0.0);
        for j in (0..d - 1).rev() {
            let z = g.coord(rem % n);
            rem /= n;
            let tj = (z - s.o[j]) * s.u[j][j];
            t2 += tj * tj;
            pd += tj * s.u[j][d - 1];
            slope = s.u[j][d - 1] + 2.0 * s.q * tj;
        }
        pd += s.q * t2;
        // In d = 2 a column cut by the top or bottom face counts with the
        // fraction inside, so the exterior part complements it exactly.
        let frac = if d == 2 {
            inside_fraction(pd, slope * h, r)
        } else {
            (pd.abs() <= r) as u8 as f64
        };
        if frac == 0.0 {
            continue;
        }
        let uu = ((pd + r) / h - 0.5).clamp(0.0, (n - 1) as f64);
        let i0 = (uu.floor() as usize).min(n - 2);
        let fr = uu - i0 as f64;
        let base = col * n + i0;
        acc += frac * ((1.0 - fr) * vals[base] + fr * vals[base + 1]);
    }
    acc * h.powi(d as i32 - 1)
}

/// Share of `δ ∈ [−½, ½]` with `|p + v δ| ≤ r`.
fn inside_fraction(p: f64, v: f64, r: f64) -> f64 {
    if v.abs() < 1e-300 {
        return (p.abs() <= r) as u8 as f64;
    }
    let (a, b) = ((-r - p) / v, (r - p) / v);
    let (lo, hi) = (a.min(b).max(-0.5), a.max(b).min(0.5));
    (hi - lo).max(0.0)
}

fn line_midpoint(g: &GridData, c: &Curve) -> f64 {
    let mut t = Vec::new();
    let r = g.r();
    c.box_crossings(&[(-r, r); 3], 2, &mut t);
    let Some((t0, t1)) = inside_hull(c, &t, &[(-r, r); 3], 2) else {
        return 0.0;
    };
    // steps no longer than h anywhere on the segment (parabolas speed up)
    let speed = |t: f64| {
        let (a, b) = (c.u[0] + 2.0 * c.w[0] * t, c.u[1] + 2.0 * c.w[1] * t);
        (a * a + b * b).sqrt()
    };
    let vmax = speed(t0).max(speed(t1));
    let m = (((t1 - t0) * vmax / g.h()).ceil() as usize).max(1);
    let dt = (t1 - t0) / m as f64;
    let mut acc = 0.0;
    for i in 0..m {
        let p = c.at(t0 + (i as f64 + 0.5) * dt);
        if g.contains(&p) {
            acc += g.interpolate(&p);
        }
    }
    acc * dt
}

/// `d = 3` hyperplanes in general position: square lattice of spacing `h`
/// in the plane, masked to the box.
fn plane_lattice(g: &GridData, s: &Sheet) -> f64 {
    let h = g.h();
    let half = 3f64.sqrt() * g.r();
    let m = (2.0 * half / h).ceil() as usize;
    let t_lo = -0.5 * m as f64 * h;
    let mut acc = 0.0;
    for i in 0..m {
        let t0 = t_lo + (i as f64 + 0.5) * h;
        for j in 0..m {
            let t1 = t_lo + (j as f64 + 0.5) * h;
            let p = s.at(&[t0, t1]);
            if g.contains(&p) {
                acc += g.interpolate(&p);
            }
        }
    }
    acc * h * h
}

// ---- closed-form integrands ------------------------------------------------

/// Where the mass of `f` sits along a curve, and how wide it is there.
struct Peaks {
    center: f64,
    sigma: f64,
    breaks: Vec<f64>,
}

/// Squared distance from the geometry's mass graph, in units of its scale.
fn objective(c: &Curve, g: &Geometry, d: usize) -> Poly {
    let mut e = Poly::new(vec![0.0]);
    let mut ridge = Poly::new(vec![g.center[d - 1]]);
    for k in 0..d - 1 {
        let pk = Poly::new(vec![c.o[k] - g.center[k], c.u[k], c.w[k]]);
        let pk2 = pk.mul(&pk);
        e = e.add(&pk2);
        ridge = ridge.add(&pk.scale(g.slope[k])).add(&pk2.scale(0.5 * g.curvature));
    }
    let res = c.coord(d - 1).add(&ridge.scale(-1.0));
    e.add(&res.mul(&res)).scale(1.0 / (g.scale * g.scale))
}

fn peaks(c: &Curve, g: &Geometry, d: usize) -> Peaks {
    let e = objective(c, g, d);
    let mins = e.local_minima();
    let fallback = || {
        let uu: f64 = (0..d).map(|k| c.u[k] * c.u[k]).sum();
        let rel: f64 = (0..d).map(|k| (c.o[k] - g.center[k]) * c.u[k]).sum();
        let center = if uu > 0.0 { -rel / uu } else { 0.0 };
        Peaks {
            center,
            sigma: g.scale / uu.sqrt().max(1e-12),
            breaks: Vec::new(),
        }
    };
    if mins.is_empty() {
        return fallback();
    }
    let best = mins
        .iter()
        .copied()
        .min_by(|a, b| e.eval(*a).partial_cmp(&e.eval(*b)).unwrap())
        .unwrap();
    let e2 = e.derivative().derivative().eval(best);
    if !(e2 > 0.0) || !e2.is_finite() {
        return fallback();
    }
    // the minimum value is a difference of large terms far from the center
    let miss = (e.eval(best) - e.eval_noise(best)).max(0.0);
    let sigma = (2.0 / e2).sqrt() * (1.0 + miss).sqrt();
    Peaks {
        center: best,
        sigma,
        breaks: if mins.len() > 1 { mins } else { Vec::new() },
    }
}

/// The bounded parameter hull of `{τ : c(τ) ∈ box}`, given the crossings.
/// `None` when the curve misses the box.
fn inside_hull(c: &Curve, crossings: &[f64], b: &[(f64, f64); 3], d: usize) -> Option<(f64, f64)> {
    let inside = |p: &Point| (0..d).all(|k| p[k] >= b[k].0 && p[k] <= b[k].1);
    let mut t: Vec<f64> = crossings.iter().copied().filter(|x| x.is_finite()).collect();
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t.dedup();
    if t.is_empty() {
        return if inside(&c.at(0.0)) {
            Some((f64::NEG_INFINITY, f64::INFINITY))
        } else {
            None
        };
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for w in t.windows(2) {
        if inside(&c.at(0.5 * (w[0] + w[1]))) {
            lo = lo.min(w[0]);
            hi = hi.max(w[1]);
        }
    }
    let span = 1.0 + (t[t.len() - 1] - t[0]).abs();
    if inside(&c.at(t[0] - span)) {
        lo = f64::NEG_INFINITY;
        hi = hi.max(t[0]);
    }
    if inside(&c.at(t[t.len() - 1] + span)) {
        hi = f64::INFINITY;
        lo = lo.min(t[t.len() - 1]);
    }
    if lo < hi {
        Some((lo, hi))
    } else {
        None
    }
}

/// Exact support ball for closed families, else the ball around the
/// support box.
pub(crate) fn support_ball(f: &Field) -> Option<(Point, f64)> {
    if let Body::Closed(fam) = f.body() {
        return fam.support_radius();
    }
    let b = f.support_box()?;
    let d = f.dim().d();
    let mut c = [0.0; 3];
    let mut r2 = 0.0;
    for k in 0..d {
        c[k] = 0.5 * (b[k].0 + b[k].1);
        r2 += (0.5 * (b[k].1 - b[k].0)).powi(2);
    }
    Some((c, r2.sqrt()))
}

/// `∫ f(c(τ)) dτ`, optionally with the integrand masked to zero inside
/// `[-mask, mask]^d`.
fn integrate_curve(f: &Field, c: &Curve, d: usize, mask: Option<f64>, quad: &QuadSettings) -> f64 {
    let g = f.geometry();
    let pk = peaks(c, &g, d);
    let mut br = pk.breaks;
    f.curve_breaks(c, &mut br);
    if let Some(r) = mask {
        c.box_crossings(&[(-r, r); 3], d, &mut br);
    }
    let mut bounds = None;
    if let Some(b) = f.support_box() {
        let mut t = Vec::new();
        c.box_crossings(&b, d, &mut t);
        match inside_hull(c, &t, &b, d) {
            None => return 0.0,
            Some(h) => bounds = Some(h),
        }
    }
    let inside = |p: &Point| match mask {
        Some(r) => (0..d).all(|k| p[k].abs() <= r),
        None => false,
    };
    // Along parabolas the coordinates grow like τ²; beyond |τ| ~ 1e7 nested
    // integrands near the ridge are lost to cancellation.
    let curved = c.w.iter().any(|w| *w != 0.0);
    let quad = if curved {
        QuadSettings {
            far: quad.far.min(1e7 / pk.sigma.max(1.0)),
            ..*quad
        }
    } else {
        *quad
    };
    let quad = &quad;
    integrate_piecewise(
        |t| {
            let p = c.at(t);
            if inside(&p) {
                0.0
            } else {
                f.value(&p)
            }
        },
        pk.center,
        pk.sigma,
        &br,
        bounds,
        quad,
    )
}

/// Gauss–Newton estimate of the sheet parameter closest to the mass graph,
/// with the spread of the leading parameter.
fn sheet_center(s: &Sheet, g: &Geometry) -> ([f64; 2], f64) {
    let d = s.d;
    let residual = |t: &[f64; 2]| -> ([f64; 3], [[f64; 2]; 3]) {
        let p = s.at(t);
        let mut r = [0.0; 3];
        let mut j = [[0.0; 2]; 3];
        let mut ridge = g.center[d - 1];
        let mut dridge = [0.0; 2];
        for k in 0..d - 1 {
            let dk = p[k] - g.center[k];
            r[k] = dk / g.scale;
            ridge += g.slope[k] * dk + 0.5 * g.curvature * dk * dk;
            for (m, jm) in dridge.iter_mut().enumerate() {
                *jm += (g.slope[k] + g.curvature * dk) * s.u[m][k];
            }
            for m in 0..2 {
                j[k][m] = s.u[m][k] / g.scale;
            }
        }
        r[d - 1] = (p[d - 1] - ridge) / g.scale;
        for m in 0..2 {
            j[d - 1][m] = (s.u[m][d - 1] + 2.0 * s.q * t[m] - dridge[m]) / g.scale;
        }
        (r, j)
    };
    let energy = |r: &[f64; 3]| r.iter().map(|v| v * v).sum::<f64>();
    let normal = |j: &[[f64; 2]; 3]| {
        let mut a = [[0.0; 2]; 2];
        for row in j.iter().take(d) {
            for m in 0..2 {
                for n in 0..2 {
                    a[m][n] += row[m] * row[n];
                }
            }
        }
        a
    };
    let mut t = [0.0; 2];
    let (mut r, mut j) = residual(&t);
    let mut e = energy(&r);
    for _ in 0..40 {
        let a = normal(&j);
        let mut b = [0.0; 2];
        for k in 0..d {
            for m in 0..2 {
                b[m] -= j[k][m] * r[k];
            }
        }
        let (a00, a01, a11) = (a[0][0] + 1e-12, a[0][1], a[1][1] + 1e-12);
        let det = a00 * a11 - a01 * a01;
        if det <= 0.0 {
            break;
        }
        let step = [(a11 * b[0] - a01 * b[1]) / det, (a00 * b[1] - a01 * b[0]) / det];
        let mut lam = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let tn = [t[0] + lam * step[0], t[1] + lam * step[1]];
            let (rn, jn) = residual(&tn);
            let en = energy(&rn);
            if en < e {
                t = tn;
                r = rn;
                j = jn;
                e = en;
                moved = true;
                break;
            }
            lam *= 0.5;
        }
        if !moved || lam * (step[0].abs() + step[1].abs()) < 1e-13 * (1.0 + t[0].abs() + t[1].abs()) {
            break;
        }
    }
    let a = normal(&j);
    let det = a[0][0] * a[1][1] - a[0][1] * a[0][1];
    let var0 = if det > 0.0 { a[1][1] / det } else { 1.0 };
    (t, var0.sqrt() * (1.0 + e).sqrt())
}

/// Closed-form path: DE quadrature centered on the peaks of the integrand.
pub(crate) fn closed_sheet(f: &Field, s: &Sheet, mask: Option<f64>, quad: &QuadSettings) -> f64 {
    let d = s.d;
    if d == 2 {
        return integrate_curve(f, &s.curve(0.0), 2, mask, quad);
    }
    let g = f.geometry();
    let (tc, sig0) = sheet_center(s, &g);
    let mut bounds = None;
    if let Some((bc, rho)) = support_ball(f) {
        // τ-range of the sheet points inside the ball, from the linear part
        // (horizontal rows only when the sheet is curved).
        let rows = if s.q == 0.0 { d } else { d - 1 };
        let mut a = [[0.0; 2]; 2];
        let mut b = [0.0; 2];
        let mut cc = 0.0;
        for k in 0..rows {
            let ok = s.o[k] - bc[k];
            cc += ok * ok;
            for m in 0..2 {
                b[m] += s.u[m][k] * ok;
                for n in 0..2 {
                    a[m][n] += s.u[m][k] * s.u[n][k];
                }
            }
        }
        let det = a[0][0] * a[1][1] - a[0][1] * a[0][1];
        if det > 0.0 {
            let inv = [[a[1][1] / det, -a[0][1] / det], [-a[0][1] / det, a[0][0] / det]];
            let t0 = -(inv[0][0] * b[0] + inv[0][1] * b[1]);
            let t1 = -(inv[1][0] * b[0] + inv[1][1] * b[1]);
            let r2 =
                cc + 2.0 * (b[0] * t0 + b[1] * t1) + a[0][0] * t0 * t0 + 2.0 * a[0][1] * t0 * t1 + a[1][1] * t1 * t1;
            if r2 >= rho * rho {
                return 0.0;
            }
            let hw = ((rho * rho - r2) * inv[0][0]).sqrt();
            bounds = Some((t0 - hw, t0 + hw));
        }
    }
    let inner = quad.inner();
    integrate_piecewise(
        |t0| integrate_curve(f, &s.curve(t0), 3, mask, &inner),
        tc[0],
        sig0,
        &[],
        bounds,
        quad,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dim::Dimension;
    use std::f64::consts::PI;

    fn q() -> QuadSettings {
        QuadSettings::default()
    }

    #[test]
    fn rsharp_gaussian_closed_form() {
        let f = Field::gaussian(Dimension::TWO, 1.0, 1.0);
        for x in [[0.3, -0.4, 0.0], [2.0, 1.0, 0.0], [-5.0, 3.0, 0.0]] {
            let v = fiber_value(FiberOp::Flat, &f, &x, &q());
            let a = 1.0 + x[0] * x[0];
            let want = (PI / a).sqrt() * (-x[1] * x[1] / a).exp();
            assert!((v - want).abs() < 1e-10 * want.max(1e-300), "{v} vs {want}");
        }
    }

    #[test]
    fn rsharp_extremizer_d2() {
        // ℛ♯⟨·⟩^{-2} = π⟨x⟩^{-1}
        let f = Field::extremizer(Dimension::TWO, 1.0, 1.0);
        for x in [[0.0, 0.0, 0.0], [1.5, -2.0, 0.0], [10.0, 30.0, 0.0]] {
            let v = fiber_value(FiberOp::Flat, &f, &x, &q());
            let want = PI / (1.0 + x[0] * x[0] + x[1] * x[1]).sqrt();
            assert!((v - want).abs() < 1e-9 * want, "{v} vs {want}");
        }
    }

    #[test]
    fn rsharp_extremizer_d3() {
        // ℛ♯⟨·⟩^{-3} = 2π⟨x⟩^{-1}
        let f = Field::extremizer(Dimension::THREE, 1.0, 1.0);
        for x in [[0.0, 0.0, 0.0], [1.0, -0.5, 2.0]] {
            let v = fiber_value(FiberOp::Flat, &f, &x, &QuadSettings::with_tol(1e-8));
            let want = 2.0 * PI / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            assert!((v - want).abs() < 1e-7 * want, "{v} vs {want}");
        }
    }

    #[test]
    fn conv_of_gaussian_has_two_peaks() {
        // 𝒞 of a narrow Gaussian above its center: the parabola crosses the
        // bump twice; compare against brute-force trapezoid sums.
        let f = Field::gaussian(Dimension::TWO, 3.0, 1.0);
        let x = [0.2, 2.0, 0.0];
        let v = fiber_value(FiberOp::Conv, &f, &x, &q());
        let hh = 1e-4;
        let brute: f64 = (-100000..100000)
            .map(|i| {
                let y = i as f64 * hh;
                f.value(&[x[0] - y, x[1] - 0.5 * y * y, 0.0])
            })
            .sum::<f64>()
            * hh;
        assert!((v - brute).abs() < 1e-8 * brute, "{v} vs {brute}");
    }

    #[test]
    fn ball_chord_lengths() {
        let f = Field::ball_indicator(Dimension::TWO, 1.0, 1.0);
        let frame = [[0.0, 1.0, 0.0], [0.0; 3]];
        for r in [0.0, 0.5, 0.99, 1.2] {
            let s = Sheet::hyperplane(r, &[1.0, 0.0, 0.0], &frame, 2);
            let v = closed_sheet(&f, &s, None, &q());
            let want = if r < 1.0 { 2.0 * (1.0 - r * r).sqrt() } else { 0.0 };
            assert!((v - want).abs() < 1e-10, "{r}: {v} vs {want}");
        }
    }

    #[test]
    fn grid_columns_match_closed() {
        let dim = Dimension::TWO;
        let f = Field::gaussian(dim, 1.0, 1.0);
        let g = GridData::sample(&f, 128, 6.0).unwrap();
        let gf = Field::from_grid(g);
        for x in [[0.3, 0.2, 0.0], [-1.0, 0.5, 0.0]] {
            for op in [FiberOp::Flat, FiberOp::Conv, FiberOp::ConvAdjoint, FiberOp::FlatAdjoint] {
                let a = fiber_value(op, &gf, &x, &q());
                let b = fiber_value(op, &f, &x, &q());
                assert!((a - b).abs() < 2e-3 * b, "{op:?} {a} vs {b}");
            }
        }
    }

    #[test]
    fn grid_exterior_completes_parabola() {
        let dim = Dimension::TWO;
        let f = Field::parabolic_extremizer(dim, 1.0);
        let g = Field::from_grid(GridData::sample_with_exterior(&f, 128, 4.0).unwrap());
        let x = [0.5, -1.0, 0.0];
        let a = fiber_value(FiberOp::Conv, &g, &x, &q());
        let b = fiber_value(FiberOp::Conv, &f, &x, &q());
        assert!((a - b).abs() < 5e-3 * b, "{a} vs {b}");
    }
}

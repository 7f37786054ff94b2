use std::sync::Arc;

use super::curve::Curve;
use super::{norm2, AffineMap, ClosedFormFamily, GridData, Point, RadialProfile};
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::quad::QuadSettings;

/// Fiber integral operators that can be attached lazily to a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiberOp {
    /// `ℛ♯f(x) = ∫ f(y', x_d + y'·x') dy'`
    Flat,
    /// `ℛ♯*g(y) = ∫ g(x', y_d − y'·x') dx'`
    FlatAdjoint,
    /// `𝒞f(x) = ∫ f(x' − y', x_d − ½|y'|²) dy'`
    Conv,
    /// `𝒞*g(x) = ∫ g(x' + y', x_d + ½|y'|²) dy'`
    ConvAdjoint,
}

impl FiberOp {
    pub fn adjoint(self) -> FiberOp {
        match self {
            FiberOp::Flat => FiberOp::FlatAdjoint,
            FiberOp::FlatAdjoint => FiberOp::Flat,
            FiberOp::Conv => FiberOp::ConvAdjoint,
            FiberOp::ConvAdjoint => FiberOp::Conv,
        }
    }
}

/// Where a field's mass sits, used to center and scale quadrature rules.
///
/// The mass is assumed to lie near the graph
/// `x_d = c_d + slope·(x' − c') + ½ curvature |x' − c'|²`, within `scale`
/// of `center` in the `x'` directions (growing linearly for extended fields).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    pub center: Point,
    pub scale: f64,
    pub slope: [f64; 2],
    pub curvature: f64,
}

impl Geometry {
    pub fn blob(center: Point, scale: f64) -> Self {
        Geometry {
            center,
            scale,
            slope: [0.0; 2],
            curvature: 0.0,
        }
    }

    /// Height of the mass graph above `x'`.
    pub fn ridge(&self, x: &Point, d: usize) -> f64 {
        let mut h = self.center[d - 1];
        let mut r2 = 0.0;
        for k in 0..d - 1 {
            let dx = x[k] - self.center[k];
            h += self.slope[k] * dx;
            r2 += dx * dx;
        }
        h + 0.5 * self.curvature * r2
    }
}

/// Field storage.
#[derive(Clone, Debug)]
pub enum Body {
    Zero,
    Closed(ClosedFormFamily),
    Grid(GridData),
    Radial(RadialProfile),
    /// `inner ∘ map`
    Affine {
        inner: Field,
        map: AffineMap,
    },
    /// `inner(x', x_d + ½ sign |x'|²)`; `sign = −1` is the pullback `Ψ*`.
    Shear {
        inner: Field,
        sign: f64,
    },
    /// Exchange of the last two coordinates.
    Swap(Field),
    /// `|s|^{-d} inner(u/s, 1/s, t/s)` with `s = x_{d-1}`.
    Inversion(Field),
    Scaled {
        inner: Field,
        factor: f64,
    },
    /// `|inner|^exponent`
    Power {
        inner: Field,
        exponent: f64,
    },
    Sum(Vec<Field>),
    /// Lazily evaluated fiber integral of `inner`.
    Fiber {
        op: FiberOp,
        inner: Field,
        quad: QuadSettings,
    },
}

/// A function on `R^d`: a closed form, a sampled grid, a radial profile or
/// a lazy composition of these.
#[derive(Clone, Debug)]
pub struct Field {
    dim: Dimension,
    body: Arc<Body>,
    nonneg: bool,
}

/// Inversion nodes landing exactly on `s = 0` use the continuous extension.
const INVERSION_EPS: f64 = 1e-100;

impl Field {
    fn make(dim: Dimension, body: Body, nonneg: bool) -> Field {
        Field {
            dim,
            body: Arc::new(body),
            nonneg,
        }
    }

    pub fn zero(dim: Dimension) -> Field {
        Field::make(dim, Body::Zero, true)
    }

    /// Closed-form family after parameter validation.
    pub fn closed(dim: Dimension, family: ClosedFormFamily) -> Result<Field> {
        let ok = match &family {
            ClosedFormFamily::Extremizer { a, c } | ClosedFormFamily::Gaussian { a, c } => *a > 0.0 && *c > 0.0,
            ClosedFormFamily::ParabolicExtremizer { c } => *c > 0.0,
            ClosedFormFamily::BallIndicator { radius, c } => *radius > 0.0 && *c > 0.0,
            ClosedFormFamily::RandomSmooth(_) => true,
            ClosedFormFamily::Bump(b) => b.width > 0.0,
        };
        if !ok {
            return Err(Error::Invalid(format!("invalid parameters for {}", family.name())));
        }
        let nonneg = family.is_nonneg();
        Ok(Field::make(dim, Body::Closed(family), nonneg))
    }

    /// `c (1 + |a x|²)^{-d/2}`; panics on non-positive parameters.
    pub fn extremizer(dim: Dimension, a: f64, c: f64) -> Field {
        Field::closed(dim, ClosedFormFamily::Extremizer { a, c }).expect("a, c > 0")
    }

    pub fn parabolic_extremizer(dim: Dimension, c: f64) -> Field {
        Field::closed(dim, ClosedFormFamily::ParabolicExtremizer { c }).expect("c > 0")
    }

    pub fn gaussian(dim: Dimension, a: f64, c: f64) -> Field {
        Field::closed(dim, ClosedFormFamily::Gaussian { a, c }).expect("a, c > 0")
    }

    pub fn ball_indicator(dim: Dimension, radius: f64, c: f64) -> Field {
        Field::closed(dim, ClosedFormFamily::BallIndicator { radius, c }).expect("radius, c > 0")
    }

    pub fn random_smooth(dim: Dimension, seed: u64, k: usize) -> Field {
        Field::closed(
            dim,
            ClosedFormFamily::RandomSmooth(super::RandomSmooth::new(dim, seed, k)),
        )
        .unwrap()
    }

    pub fn bump(dim: Dimension, seed: u64) -> Field {
        Field::closed(dim, ClosedFormFamily::Bump(super::CompactBump::random(dim, seed))).unwrap()
    }

    pub fn from_grid(grid: GridData) -> Field {
        let nonneg = grid.values().iter().all(|v| *v >= 0.0) && grid.exterior().map_or(true, |e| e.is_nonneg());
        Field::make(grid.dim(), Body::Grid(grid), nonneg)
    }

    pub fn from_radial(profile: RadialProfile) -> Field {
        let nonneg = profile.values().iter().all(|v| *v >= 0.0);
        Field::make(profile.dim(), Body::Radial(profile), nonneg)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self.body, Body::Zero)
    }

    pub fn as_grid(&self) -> Option<&GridData> {
        match &*self.body {
            Body::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_radial(&self) -> Option<&RadialProfile> {
        match &*self.body {
            Body::Radial(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_grid(&self) -> bool {
        self.as_grid().is_some()
    }

    /// Whether evaluation involves a lazy fiber integral somewhere.
    pub(crate) fn has_fiber(&self) -> bool {
        match self.body() {
            Body::Fiber { .. } => true,
            Body::Affine { inner, .. }
            | Body::Shear { inner, .. }
            | Body::Scaled { inner, .. }
            | Body::Power { inner, .. }
            | Body::Swap(inner)
            | Body::Inversion(inner) => inner.has_fiber(),
            Body::Sum(terms) => terms.iter().any(Field::has_fiber),
            Body::Grid(g) => g.exterior().is_some_and(Field::has_fiber),
            _ => false,
        }
    }

    /// True for fields known to be radial about 0 and nonincreasing in `|x|`.
    pub fn is_radial_decreasing(&self) -> bool {
        match &*self.body {
            Body::Zero => true,
            Body::Closed(f) => f.is_radial_decreasing(),
            Body::Radial(r) => r.is_nonincreasing(),
            Body::Scaled { inner, factor } => *factor >= 0.0 && inner.is_radial_decreasing(),
            Body::Power { inner, exponent } => *exponent > 0.0 && inner.is_nonneg() && inner.is_radial_decreasing(),
            _ => false,
        }
    }

    // ---- composition -------------------------------------------------

    /// `f ∘ φ`; closed forms store the map, grids are resampled.
    pub fn compose_affine(&self, map: &AffineMap) -> Result<Field> {
        if map.dim() != self.dim {
            return Err(Error::Invalid("affine map dimension mismatch".into()));
        }
        if map.det() == 0.0 {
            return Err(Error::SingularMap(0.0));
        }
        if let Some(g) = self.as_grid() {
            let lazy = Field::make(
                self.dim,
                Body::Affine {
                    inner: self.clone(),
                    map: map.clone(),
                },
                self.nonneg,
            );
            return GridData::sample(&lazy, g.n(), g.r()).map(Field::from_grid);
        }
        Ok(self.affine_lazy(map))
    }

    pub(crate) fn affine_lazy(&self, map: &AffineMap) -> Field {
        if let Body::Affine { inner, map: m0 } = &*self.body {
            return Field::make(
                self.dim,
                Body::Affine {
                    inner: inner.clone(),
                    map: m0.compose(map),
                },
                self.nonneg,
            );
        }
        Field::make(
            self.dim,
            Body::Affine {
                inner: self.clone(),
                map: map.clone(),
            },
            self.nonneg,
        )
    }

    pub(crate) fn shear_lazy(&self, sign: f64) -> Field {
        if let Body::Shear { inner, sign: s0 } = &*self.body {
            let s = s0 + sign;
            if s == 0.0 {
                return inner.clone();
            }
            return Field::make(
                self.dim,
                Body::Shear {
                    inner: inner.clone(),
                    sign: s,
                },
                self.nonneg,
            );
        }
        Field::make(
            self.dim,
            Body::Shear {
                inner: self.clone(),
                sign,
            },
            self.nonneg,
        )
    }

    pub(crate) fn swap_lazy(&self) -> Field {
        if let Body::Swap(inner) = &*self.body {
            return inner.clone();
        }
        Field::make(self.dim, Body::Swap(self.clone()), self.nonneg)
    }

    pub(crate) fn inversion_lazy(&self) -> Field {
        if let Body::Inversion(inner) = &*self.body {
            return inner.clone();
        }
        Field::make(self.dim, Body::Inversion(self.clone()), self.nonneg)
    }

    pub(crate) fn fiber_lazy(&self, op: FiberOp, quad: QuadSettings) -> Field {
        Field::make(
            self.dim,
            Body::Fiber {
                op,
                inner: self.clone(),
                quad,
            },
            self.nonneg,
        )
    }

    /// `c · f`.
    pub fn scaled(&self, factor: f64) -> Field {
        if let Some(g) = self.as_grid() {
            return Field::from_grid(g.map_values(|v| v * factor, self.clone_exterior_scaled(factor)));
        }
        if let Some(r) = self.as_radial() {
            return Field::from_radial(r.map_values(|v| v * factor));
        }
        if let Body::Scaled { inner, factor: f0 } = &*self.body {
            return inner.scaled(f0 * factor);
        }
        Field::make(
            self.dim,
            Body::Scaled {
                inner: self.clone(),
                factor,
            },
            self.nonneg && factor >= 0.0,
        )
    }

    fn clone_exterior_scaled(&self, factor: f64) -> Option<Field> {
        self.as_grid().and_then(|g| g.exterior().map(|e| e.scaled(factor)))
    }

    /// `|f|^e`.
    pub fn power(&self, exponent: f64) -> Field {
        if let Some(g) = self.as_grid() {
            let ext = g.exterior().map(|e| e.power(exponent));
            return Field::from_grid(g.map_values(|v| v.abs().powf(exponent), ext));
        }
        if let Some(r) = self.as_radial() {
            return Field::from_radial(r.map_values(|v| v.abs().powf(exponent)));
        }
        Field::make(
            self.dim,
            Body::Power {
                inner: self.clone(),
                exponent,
            },
            true,
        )
    }

    /// Pointwise sum; all terms must share the dimension.
    pub fn sum(terms: Vec<Field>) -> Result<Field> {
        let dim = match terms.first() {
            Some(f) => f.dim,
            None => return Err(Error::Invalid("empty sum".into())),
        };
        if terms.iter().any(|t| t.dim != dim) {
            return Err(Error::Invalid("dimension mismatch in sum".into()));
        }
        let terms: Vec<Field> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        match terms.len() {
            0 => Ok(Field::zero(dim)),
            1 => Ok(terms.into_iter().next().unwrap()),
            _ => {
                let nonneg = terms.iter().all(|t| t.nonneg);
                Ok(Field::make(dim, Body::Sum(terms), nonneg))
            }
        }
    }

    /// `self + eps · g`.
    pub fn perturbed(&self, g: &Field, eps: f64) -> Result<Field> {
        Field::sum(vec![self.clone(), g.scaled(eps)])
    }

    // ---- evaluation --------------------------------------------------

    /// Checked evaluation at a point given as a slice of length `d`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let d = self.dim.d();
        if x.len() != d {
            return Err(Error::Invalid(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                d
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        if matches!(*self.body, Body::Inversion(_)) && x[d - 2] == 0.0 {
            return Err(Error::SingularPoint);
        }
        Ok(self.value(&super::point(x)))
    }

    /// Unchecked evaluation.
    #[inline]
    pub fn value(&self, x: &Point) -> f64 {
        let d = self.dim.d();
        match &*self.body {
            Body::Zero => 0.0,
            Body::Closed(f) => f.value(x, d),
            Body::Grid(g) => g.value(x),
            Body::Radial(r) => r.value_at_radius(norm2(x, d).sqrt()),
            Body::Affine { inner, map } => inner.value(&map.apply(x)),
            Body::Shear { inner, sign } => {
                let mut y = *x;
                y[d - 1] += 0.5 * sign * norm2(x, d - 1);
                inner.value(&y)
            }
            Body::Swap(inner) => {
                let mut y = *x;
                y.swap(d - 2, d - 1);
                inner.value(&y)
            }
            Body::Inversion(inner) => {
                let mut s = x[d - 2];
                if s == 0.0 {
                    s = INVERSION_EPS;
                }
                let inv = 1.0 / s;
                let mut y = [0.0; 3];
                for k in 0..d {
                    y[k] = x[k] * inv;
                }
                y[d - 2] = inv;
                let v = inner.value(&y);
                if v == 0.0 {
                    0.0
                } else {
                    v * inv.abs().powi(d as i32)
                }
            }
            Body::Scaled { inner, factor } => factor * inner.value(x),
            Body::Power { inner, exponent } => {
                let v = inner.value(x);
                if v == 0.0 {
                    0.0
                } else {
                    v.abs().powf(*exponent)
                }
            }
            Body::Sum(terms) => terms.iter().map(|t| t.value(x)).sum(),
            Body::Fiber { op, inner, quad } => crate::transforms::fiber_value(*op, inner, x, quad),
        }
    }

    // ---- quadrature hints --------------------------------------------

    pub fn geometry(&self) -> Geometry {
        let d = self.dim.d();
        match &*self.body {
            Body::Zero => Geometry::blob([0.0; 3], 1.0),
            Body::Closed(f) => {
                let (c, s) = f.center_scale(d);
                let mut g = Geometry::blob(c, s);
                if matches!(f, ClosedFormFamily::ParabolicExtremizer { .. }) {
                    g.curvature = -1.0;
                }
                g
            }
            Body::Grid(g) => match g.exterior() {
                Some(e) => e.geometry(),
                None => Geometry::blob([0.0; 3], g.r() * 0.5),
            },
            Body::Radial(r) => Geometry::blob([0.0; 3], r.scale_hint()),
            Body::Affine { inner, map } => {
                let gi = inner.geometry();
                let inv = map.inverse();
                let c = inv.apply(&gi.center);
                Geometry::blob(c, gi.scale * inv.linear_norm_bound() / (d as f64).sqrt())
            }
            Body::Shear { inner, sign } => {
                let gi = inner.geometry();
                // x_d = x_d^inner − ½ sign |x'|², re-expanded around c'.
                let mut g = gi;
                let cp2 = norm2(&gi.center, d - 1);
                g.center[d - 1] = gi.center[d - 1] - 0.5 * sign * cp2;
                for k in 0..d - 1 {
                    g.slope[k] = gi.slope[k] - sign * gi.center[k];
                }
                g.curvature = gi.curvature - sign;
                g
            }
            Body::Swap(inner) => {
                let gi = inner.geometry();
                let mut c = gi.center;
                c.swap(d - 2, d - 1);
                Geometry::blob(c, gi.scale)
            }
            Body::Inversion(inner) => {
                let gi = inner.geometry();
                let s = gi.center[d - 2];
                if s.abs() > 0.5 * gi.scale {
                    let mut c = [0.0; 3];
                    for k in 0..d {
                        c[k] = gi.center[k] / s;
                    }
                    c[d - 2] = 1.0 / s;
                    Geometry::blob(c, gi.scale / (s * s))
                } else {
                    Geometry::blob([0.0; 3], gi.scale.max(1.0))
                }
            }
            Body::Scaled { inner, .. } | Body::Power { inner, .. } => inner.geometry(),
            Body::Sum(terms) => terms[0].geometry(),
            Body::Fiber { op, inner, .. } => {
                let gi = inner.geometry();
                let c = gi.center;
                match op {
                    FiberOp::Flat | FiberOp::FlatAdjoint => {
                        let sign = if *op == FiberOp::Flat { -1.0 } else { 1.0 };
                        let mut g = Geometry::blob([0.0; 3], gi.scale);
                        g.center[d - 1] = c[d - 1];
                        for k in 0..d - 1 {
                            g.slope[k] = sign * c[k];
                        }
                        g
                    }
                    FiberOp::Conv => Geometry {
                        center: c,
                        scale: gi.scale,
                        slope: [0.0; 2],
                        curvature: 1.0,
                    },
                    FiberOp::ConvAdjoint => Geometry {
                        center: c,
                        scale: gi.scale,
                        slope: [0.0; 2],
                        curvature: -1.0,
                    },
                }
            }
        }
    }

    /// Parameters `t` at which `t ↦ f(o + t u)` may jump.
    pub fn line_breaks(&self, o: &Point, u: &Point, out: &mut Vec<f64>) {
        self.curve_breaks(&Curve::line(o, u), out);
    }

    /// Parameters at which `f` may jump along a quadratic curve.
    pub(crate) fn curve_breaks(&self, c: &Curve, out: &mut Vec<f64>) {
        let d = self.dim.d();
        match &*self.body {
            Body::Closed(ClosedFormFamily::BallIndicator { radius, .. }) => {
                c.sphere_crossings(&[0.0; 3], *radius, d, out);
            }
            Body::Grid(g) => {
                let r = g.r();
                c.box_crossings(&[(-r, r); 3], d, out);
                if let Some(e) = g.exterior() {
                    e.curve_breaks(c, out);
                }
            }
            Body::Affine { inner, map } => {
                let c2 = Curve {
                    o: map.apply(&c.o),
                    u: map.apply_linear(&c.u),
                    w: map.apply_linear(&c.w),
                };
                inner.curve_breaks(&c2, out);
            }
            Body::Swap(inner) => {
                let mut c2 = *c;
                c2.o.swap(d - 2, d - 1);
                c2.u.swap(d - 2, d - 1);
                c2.w.swap(d - 2, d - 1);
                inner.curve_breaks(&c2, out);
            }
            Body::Shear { inner, sign } if c.flat_horizontal(d) => {
                // The shear adds ½ sign |x'|², quadratic along the curve.
                let mut c2 = *c;
                let h = 0.5 * sign;
                c2.o[d - 1] += h * norm2(&c.o, d - 1);
                c2.u[d - 1] += 2.0 * h * super::dot(&c.o, &c.u, d - 1);
                c2.w[d - 1] += h * norm2(&c.u, d - 1);
                inner.curve_breaks(&c2, out);
            }
            Body::Scaled { inner, .. } | Body::Power { inner, .. } => inner.curve_breaks(c, out),
            Body::Sum(terms) => {
                for t in terms {
                    t.curve_breaks(c, out);
                }
            }
            _ => {}
        }
    }

    /// Kinks of one-dimensional marginals along coordinate `axis`.
    pub fn axis_breaks(&self, axis: usize, out: &mut Vec<f64>) {
        match &*self.body {
            Body::Closed(ClosedFormFamily::BallIndicator { radius, .. }) => {
                out.push(-radius);
                out.push(*radius);
            }
            Body::Grid(g) => {
                out.push(-g.r());
                out.push(g.r());
            }
            Body::Scaled { inner, .. } | Body::Power { inner, .. } => inner.axis_breaks(axis, out),
            Body::Sum(terms) => {
                for t in terms {
                    t.axis_breaks(axis, out);
                }
            }
            _ => {
                if let Some(b) = self.support_box() {
                    out.push(b[axis].0);
                    out.push(b[axis].1);
                }
            }
        }
    }

    /// Axis-aligned box containing the support, if bounded and known.
    pub fn support_box(&self) -> Option<[(f64, f64); 3]> {
        let d = self.dim.d();
        match &*self.body {
            Body::Closed(f) => f.support_radius().map(|(c, r)| {
                let mut b = [(0.0, 0.0); 3];
                for k in 0..d {
                    b[k] = (c[k] - r, c[k] + r);
                }
                b
            }),
            Body::Grid(g) if g.exterior().is_none() => {
                let mut b = [(0.0, 0.0); 3];
                for bk in b.iter_mut().take(d) {
                    *bk = (-g.r(), g.r());
                }
                Some(b)
            }
            Body::Affine { inner, map } => {
                let ib = inner.support_box()?;
                let inv = map.inverse();
                let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 3];
                for corner in 0..(1usize << d) {
                    let mut y = [0.0; 3];
                    for k in 0..d {
                        y[k] = if corner >> k & 1 == 1 { ib[k].1 } else { ib[k].0 };
                    }
                    let x = inv.apply(&y);
                    for k in 0..d {
                        b[k].0 = b[k].0.min(x[k]);
                        b[k].1 = b[k].1.max(x[k]);
                    }
                }
                Some(b)
            }
            Body::Swap(inner) => {
                let mut b = inner.support_box()?;
                b.swap(d - 2, d - 1);
                Some(b)
            }
            Body::Scaled { inner, .. } | Body::Power { inner, .. } => inner.support_box(),
            Body::Sum(terms) => {
                let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 3];
                for t in terms {
                    let tb = t.support_box()?;
                    for k in 0..d {
                        b[k].0 = b[k].0.min(tb[k].0);
                        b[k].1 = b[k].1.max(tb[k].1);
                    }
                }
                Some(b)
            }
            _ => None,
        }
    }

    /// Largest of `|f|` over a coarse probe of the geometry region; used for
    /// relative thresholds.
    pub fn probe_max(&self) -> f64 {
        if let Some(g) = self.as_grid() {
            return g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        if let Some(r) = self.as_radial() {
            return r.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        }
        let d = self.dim.d();
        let g = self.geometry();
        let mut m = 0.0f64;
        let n = if d == 2 { 41 } else { 15 };
        let mut idx = [0usize; 3];
        loop {
            let mut x = [0.0; 3];
            for k in 0..d - 1 {
                x[k] = g.center[k] + g.scale * 3.0 * (idx[k] as f64 / (n - 1) as f64 * 2.0 - 1.0);
            }
            let w = g.scale * 3.0 * (idx[d - 1] as f64 / (n - 1) as f64 * 2.0 - 1.0);
            x[d - 1] = g.ridge(&x, d) + w;
            m = m.max(self.value(&x).abs());
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == d {
                    return m;
                }
            }
        }
    }
}

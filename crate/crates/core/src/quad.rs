//! One-dimensional quadrature rules.
//!
//! Double-exponential (DE) trapezoid rules handle analytic integrands on
//! infinite and half-infinite ranges without truncating the domain, and
//! tanh-sinh handles finite segments with endpoint singularities. Each rule
//! halves its step until two successive levels agree to the requested
//! tolerance.

use std::f64::consts::FRAC_PI_2;

/// Controls for the adaptive DE rules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSettings {
    /// Relative tolerance between successive levels.
    pub tol: f64,
    /// Absolute tolerance floor.
    pub abs_tol: f64,
    /// First level; the step is `2^{-level}`.
    pub min_level: u32,
    /// Last level tried before giving up and returning the finest estimate.
    pub max_level: u32,
    /// Nodes farther than this many scale lengths from the center are
    /// dropped. The tail beyond the default is below 1e-11 relative for
    /// integrands decaying like `|y|^{-2}`, and nested integrands lose their
    /// own accuracy out there anyway.
    pub far: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            tol: 1e-10,
            abs_tol: 1e-300,
            min_level: 3,
            max_level: 9,
            far: 1e11,
        }
    }
}

impl QuadSettings {
    pub fn with_tol(tol: f64) -> Self {
        QuadSettings { tol, ..Self::default() }
    }

    /// Settings for an integral nested inside another one: a tighter
    /// tolerance keeps the inner noise below the outer convergence test.
    pub fn inner(&self) -> Self {
        QuadSettings {
            tol: (self.tol * 0.1).max(1e-15),
            ..*self
        }
    }
}

const T_MAX_EXP: f64 = 4.5;
const T_MAX_TANH: f64 = 3.5;

/// Variable maps `t -> (y, dy/dt)`.
#[derive(Clone, Copy, Debug)]
#[allow(clippy::enum_variant_names)]
enum DeMap {
    SinhSinh { c: f64, s: f64, far: f64 },
    ExpSinh { a: f64, s: f64, sign: f64, far: f64 },
    TanhSinh { a: f64, b: f64 },
}

impl DeMap {
    fn t_max(&self) -> f64 {
        match self {
            DeMap::TanhSinh { .. } => T_MAX_TANH,
            _ => T_MAX_EXP,
        }
    }

    #[inline]
    fn node(&self, t: f64) -> Option<(f64, f64)> {
        match *self {
            DeMap::SinhSinh { c, s, far } => {
                let u = FRAC_PI_2 * t.sinh();
                let off = u.sinh();
                if off.abs() > far {
                    return None;
                }
                Some((c + s * off, s * FRAC_PI_2 * t.cosh() * u.cosh()))
            }
            DeMap::ExpSinh { a, s, sign, far } => {
                let e = (FRAC_PI_2 * t.sinh()).exp();
                let off = s * e;
                if off == 0.0 || e > far {
                    return None;
                }
                Some((a + sign * off, s * FRAC_PI_2 * t.cosh() * e))
            }
            DeMap::TanhSinh { a, b } => {
                let half = 0.5 * (b - a);
                let u = FRAC_PI_2 * t.sinh();
                // Offsets from the nearer endpoint avoid cancellation in 1 - tanh.
                let ex = (-2.0 * u.abs()).exp();
                let off = 2.0 * half * ex / (1.0 + ex);
                let y = if u >= 0.0 { b - off } else { a + off };
                if y <= a || y >= b {
                    return None;
                }
                let sech = 2.0 / (u.exp() + (-u).exp());
                Some((y, half * FRAC_PI_2 * t.cosh() * sech * sech))
            }
        }
    }
}

/// Trapezoid sums of `f(y(t)) y'(t)` with step halving.
fn de_integrate<F: Fn(f64) -> f64>(f: &F, map: DeMap, s: &QuadSettings) -> f64 {
    let t_max = map.t_max();
    let mut h = 0.5f64.powi(s.min_level as i32);
    let term = |t: f64| -> f64 {
        match map.node(t) {
            Some((y, w)) if w.is_finite() && w > 0.0 => {
                let v = f(y);
                if v == 0.0 {
                    0.0
                } else {
                    v * w
                }
            }
            _ => 0.0,
        }
    };

    // Coarsest level fixes the truncation window [-t_lo, t_hi].
    let center = term(0.0);
    let mut sum = center;
    let mut max_abs = center.abs();
    let mut bounds = [t_max, t_max];
    for (side, sign) in [1.0f64, -1.0].iter().enumerate() {
        let mut small = 0;
        let mut k = 1;
        loop {
            let t = sign * k as f64 * h;
            if t.abs() > t_max {
                break;
            }
            let v = term(t);
            sum += v;
            max_abs = max_abs.max(v.abs());
            if max_abs > 0.0 && v.abs() <= 1e-18 * max_abs && t.abs() > 1.0 {
                small += 1;
                if small >= 4 {
                    bounds[side] = t.abs();
                    break;
                }
            } else {
                small = 0;
            }
            k += 1;
        }
    }
    let mut estimate = sum * h;

    for _ in s.min_level..s.max_level {
        h *= 0.5;
        let mut add = 0.0;
        for (side, sign) in [1.0f64, -1.0].iter().enumerate() {
            let mut k = 1usize;
            loop {
                let t = sign * k as f64 * h;
                if t.abs() > bounds[side] {
                    break;
                }
                add += term(t);
                k += 2;
            }
        }
        sum += add;
        let next = sum * h;
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= s.tol * next.abs() || diff <= s.abs_tol {
            break;
        }
    }
    estimate
}

/// `∫_ℝ f(y) dy`, with the bulk of the mass near `center` at width `scale`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, center: f64, scale: f64, s: &QuadSettings) -> f64 {
    de_integrate(
        &f,
        DeMap::SinhSinh {
            c: center,
            s: scale.max(1e-300),
            far: s.far,
        },
        s,
    )
}

/// `∫_a^∞ f(y) dy`.
pub fn integrate_upper<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, s: &QuadSettings) -> f64 {
    de_integrate(
        &f,
        DeMap::ExpSinh {
            a,
            s: scale.max(1e-300),
            sign: 1.0,
            far: s.far,
        },
        s,
    )
}

/// `∫_{-∞}^b f(y) dy`.
pub fn integrate_lower<F: Fn(f64) -> f64>(f: F, b: f64, scale: f64, s: &QuadSettings) -> f64 {
    de_integrate(
        &f,
        DeMap::ExpSinh {
            a: b,
            s: scale.max(1e-300),
            sign: -1.0,
            far: s.far,
        },
        s,
    )
}

/// `∫_a^b f(y) dy` for a finite segment; endpoint singularities are allowed.
pub fn integrate_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, s: &QuadSettings) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    de_integrate(&f, DeMap::TanhSinh { a, b }, s)
}

/// Integral over `bounds` (or all of ℝ) of a function that may jump at the
/// given break points. Segments between breaks use tanh-sinh, unbounded
/// ends use exp-sinh scaled by the distance to `center`.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    center: f64,
    scale: f64,
    breaks: &[f64],
    bounds: Option<(f64, f64)>,
    s: &QuadSettings,
) -> f64 {
    let (lo, hi) = bounds.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if !(hi > lo) {
        return 0.0;
    }
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > lo && *b < hi)
        .collect();
    if lo.is_finite() {
        pts.push(lo);
    }
    if hi.is_finite() {
        pts.push(hi);
    }
    if pts.is_empty() {
        return integrate_real_line(&f, center, scale, s);
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let mut total = 0.0;
    if lo == f64::NEG_INFINITY {
        let a = pts[0];
        let sc = scale + (center - a).max(0.0);
        total += integrate_lower(&f, a, sc, s);
    }
    for w in pts.windows(2) {
        total += integrate_interval(&f, w[0], w[1], s);
    }
    if hi == f64::INFINITY {
        let b = *pts.last().unwrap();
        let sc = scale + (center - b).max(0.0);
        total += integrate_upper(&f, b, sc, s);
    }
    total
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in it {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

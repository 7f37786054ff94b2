//! Small dense polynomials in one variable, used to locate peaks and
//! support crossings along quadratic curves.

/// Coefficients in increasing degree; trailing zeros are allowed.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(mut c: Vec<f64>) -> Poly {
        while c.len() > 1 && *c.last().unwrap() == 0.0 {
            c.pop();
        }
        Poly(c)
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// Rounding-noise scale of `eval(t)`: `Σ |c_k| |t|^k` times a few ulps.
    pub fn eval_noise(&self, t: f64) -> f64 {
        let a = t.abs();
        1e-14 * self.0.iter().rev().fold(0.0, |acc, c| acc * a + c.abs())
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly::new(self.0.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let c = (0..n)
            .map(|k| self.0.get(k).copied().unwrap_or(0.0) + other.0.get(k).copied().unwrap_or(0.0))
            .collect();
        Poly::new(c)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut c = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    /// Sorted real roots, found by bracketing between the roots of the
    /// derivative and bisecting. Multiple roots may be reported once or
    /// missed when they do not change sign.
    pub fn real_roots(&self) -> Vec<f64> {
        let n = self.degree();
        let lead = self.0[n];
        if n == 0 || lead == 0.0 {
            return Vec::new();
        }
        if n == 1 {
            return vec![-self.0[0] / lead];
        }
        if n == 2 {
            let (c, b, a) = (self.0[0], self.0[1], lead);
            let disc = b * b - 4.0 * a * c;
            if disc < 0.0 {
                return Vec::new();
            }
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let mut r = if q == 0.0 { vec![0.0, 0.0] } else { vec![q / a, c / q] };
            r.sort_by(|x, y| x.partial_cmp(y).unwrap());
            if disc == 0.0 {
                r.truncate(1);
            }
            return r;
        }
        // Cauchy bound on root magnitudes.
        let bound = 1.0 + self.0[..n].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
        let mut pts = vec![-bound];
        pts.extend(self.derivative().real_roots().into_iter().filter(|t| t.abs() < bound));
        pts.push(bound);
        let mut roots = Vec::new();
        for w in pts.windows(2) {
            let (mut a, mut b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa == 0.0 {
                roots.push(a);
                continue;
            }
            if fa * fb > 0.0 {
                continue;
            }
            let sa = fa.signum();
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if self.eval(m).signum() == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        if self.eval(bound) == 0.0 {
            roots.push(bound);
        }
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
        roots
    }

    /// Local minima (sorted), found from the critical points.
    pub fn local_minima(&self) -> Vec<f64> {
        let d1 = self.derivative();
        let d2 = d1.derivative();
        d1.real_roots().into_iter().filter(|t| d2.eval(*t) > 0.0).collect()
    }
}

/// Roots of `a t² + b t + c` (any of the coefficients may vanish).
pub(crate) fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    Poly::new(vec![c, b, a]).real_roots()
}

use super::Point;
use crate::poly::{quadratic_roots, Poly};

/// Quadratic curve `τ ↦ o + τ u + τ² w` in `R^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Curve {
    pub o: Point,
    pub u: Point,
    pub w: Point,
}

impl Curve {
    pub fn line(o: &Point, u: &Point) -> Curve {
        Curve {
            o: *o,
            u: *u,
            w: [0.0; 3],
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Point {
        let mut p = [0.0; 3];
        for k in 0..3 {
            p[k] = self.o[k] + t * (self.u[k] + t * self.w[k]);
        }
        p
    }

    /// Coordinate `k` as a polynomial in `τ`.
    pub fn coord(&self, k: usize) -> Poly {
        Poly::new(vec![self.o[k], self.u[k], self.w[k]])
    }

    /// Parameters where coordinate `k` equals `level`.
    pub fn crossings(&self, k: usize, level: f64, out: &mut Vec<f64>) {
        out.extend(quadratic_roots(self.w[k], self.u[k], self.o[k] - level));
    }

    /// Parameters where the curve crosses the boundary of `box_`.
    pub fn box_crossings(&self, box_: &[(f64, f64); 3], d: usize, out: &mut Vec<f64>) {
        for (k, b) in box_.iter().enumerate().take(d) {
            self.crossings(k, b.0, out);
            self.crossings(k, b.1, out);
        }
    }

    /// Parameters where `|curve(τ) − c| = r`.
    pub fn sphere_crossings(&self, c: &Point, r: f64, d: usize, out: &mut Vec<f64>) {
        let mut p = Poly::new(vec![-r * r]);
        for k in 0..d {
            let ck = Poly::new(vec![self.o[k] - c[k], self.u[k], self.w[k]]);
            p = p.add(&ck.mul(&ck));
        }
        out.extend(p.real_roots());
    }

    /// True when the curve has no quadratic term in the first `d-1` coordinates.
    pub fn flat_horizontal(&self, d: usize) -> bool {
        (0..d - 1).all(|k| self.w[k] == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_crosses_box_four_times() {
        // (τ, 1 - τ²) against [-2,2]²
        let c = Curve {
            o: [0.0, 1.0, 0.0],
            u: [1.0, 0.0, 0.0],
            w: [0.0, -1.0, 0.0],
        };
        let mut t = Vec::new();
        c.box_crossings(&[(-2.0, 2.0), (-2.0, 2.0), (0.0, 0.0)], 2, &mut t);
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [-3f64.sqrt(), -2.0, 2.0, 3f64.sqrt()];
        let mut want = want.to_vec();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(t.len(), 4);
        for (a, b) in t.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn line_meets_unit_circle() {
        let c = Curve::line(&[0.0, 0.5, 0.0], &[1.0, 0.0, 0.0]);
        let mut t = Vec::new();
        c.sphere_crossings(&[0.0; 3], 1.0, 2, &mut t);
        assert_eq!(t.len(), 2);
        assert!((t[1] - 0.75f64.sqrt()).abs() < 1e-12);
    }
}

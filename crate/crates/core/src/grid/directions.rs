use std::f64::consts::PI;

use super::Point;
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// How the sphere points were generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionRule {
    /// Equally spaced angles on the circle.
    Uniform,
    /// Fibonacci lattice with equal weights.
    Fibonacci,
    /// Gauss–Legendre in `cos θ` times uniform azimuth.
    GaussProduct,
}

/// Quadrature points and weights on `S^{d-1}`; weights sum to the area.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionGrid {
    dim: Dimension,
    rule: DirectionRule,
    points: Vec<Point>,
    weights: Vec<f64>,
}

/// `count` directions: uniform angles for `d = 2`, a Fibonacci lattice for `d = 3`.
pub fn make_direction_grid(dim: Dimension, count: usize) -> Result<DirectionGrid> {
    if count < 4 {
        return Err(Error::Invalid(format!("direction count {count} is below 4")));
    }
    let area = dim.sphere_area();
    let w = area / count as f64;
    let points: Vec<Point> = match dim.d() {
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count as f64;
                [a.cos(), a.sin(), 0.0]
            })
            .collect(),
        _ => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2 * k + 1) as f64 / count as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    [rho * phi.cos(), rho * phi.sin(), z]
                })
                .collect()
        }
    };
    let rule = if dim.d() == 2 {
        DirectionRule::Uniform
    } else {
        DirectionRule::Fibonacci
    };
    Ok(DirectionGrid {
        dim,
        rule,
        points,
        weights: vec![w; count],
    })
}

impl DirectionGrid {
    /// Product rule on `S²` with `n` Gauss–Legendre nodes in `cos θ` and
    /// `2n` azimuths; exact for spherical polynomials of degree `< 2n`.
    pub fn gauss_product(n: usize) -> Result<DirectionGrid> {
        if n < 2 {
            return Err(Error::Invalid("gauss product rule needs n >= 2".into()));
        }
        let (z, wz) = gauss_legendre(n);
        let m = 2 * n;
        let mut points = Vec::with_capacity(n * m);
        let mut weights = Vec::with_capacity(n * m);
        for (zi, wi) in z.iter().zip(&wz) {
            let rho = (1.0 - zi * zi).sqrt();
            for k in 0..m {
                let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                points.push([rho * phi.cos(), rho * phi.sin(), *zi]);
                weights.push(wi * 2.0 * PI / m as f64);
            }
        }
        Ok(DirectionGrid {
            dim: Dimension::THREE,
            rule: DirectionRule::GaussProduct,
            points,
            weights,
        })
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }
    pub fn rule(&self) -> DirectionRule {
        self.rule
    }
    pub fn points(&self) -> &[Point] {
        &self.points
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of `-θ` when the grid is symmetric under the antipodal map.
    pub fn antipode(&self, i: usize) -> Option<usize> {
        let d = self.dim.d();
        let p = self.points[i];
        self.points
            .iter()
            .position(|q| (0..d).all(|k| (q[k] + p[k]).abs() < 1e-12))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_uniform_angles() {
        let g = make_direction_grid(Dimension::TWO, 4).unwrap();
        let want = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, w) in g.points().iter().zip(want) {
            assert!((p[0] - w[0]).abs() < 1e-15 && (p[1] - w[1]).abs() < 1e-15);
        }
        assert!(g.weights().iter().all(|w| (w - PI / 2.0).abs() < 1e-15));
    }

    #[test]
    fn fibonacci_weights_and_norms() {
        let g = make_direction_grid(Dimension::THREE, 100).unwrap();
        assert_eq!(g.len(), 100);
        let s: f64 = g.weights().iter().sum();
        assert!((s - 4.0 * PI).abs() < 1e-12);
        for p in g.points() {
            assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() - 1.0).abs() < 1e-12);
        }
        assert!(make_direction_grid(Dimension::THREE, 3).is_err());
    }

    #[test]
    fn gauss_product_integrates_polynomials() {
        let g = DirectionGrid::gauss_product(6).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 4.0 * PI).abs() < 1e-12);
        let m: f64 = g.points().iter().zip(g.weights()).map(|(p, w)| w * p[2].powi(4)).sum();
        assert!((m - 4.0 * PI / 5.0).abs() < 1e-12);
        let m: f64 = g
            .points()
            .iter()
            .zip(g.weights())
            .map(|(p, w)| w * p[0].powi(2) * p[1].powi(2))
            .sum();
        assert!((m - 4.0 * PI / 15.0).abs() < 1e-12);
    }
}

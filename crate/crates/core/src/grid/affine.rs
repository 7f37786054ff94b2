use rand::Rng;

use super::{family::random_orthonormal, Point};
use crate::dim::Dimension;
use crate::error::{Error, Result};

/// Invertible affine self-map `x ↦ A x + b` of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    dim: Dimension,
    m: [[f64; 3]; 3],
    b: Point,
    det: f64,
}

fn determinant(m: &[[f64; 3]; 3], d: usize) -> f64 {
    if d == 2 {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    } else {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

impl AffineMap {
    /// Builds the map from a row-major `d×d` matrix and a translation.
    pub fn new(dim: Dimension, matrix: &[f64], translation: &[f64]) -> Result<Self> {
        let d = dim.d();
        if matrix.len() != d * d || translation.len() != d {
            return Err(Error::Invalid("affine map needs a d×d matrix and a d-vector".into()));
        }
        let mut m = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = matrix[i * d + j];
            }
        }
        let mut b = [0.0; 3];
        b[..d].copy_from_slice(translation);
        Self::from_parts(dim, m, b)
    }

    fn from_parts(dim: Dimension, m: [[f64; 3]; 3], b: Point) -> Result<Self> {
        let d = dim.d();
        if m.iter().flatten().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("affine map has non-finite entries".into()));
        }
        let det = determinant(&m, d);
        let frob: f64 = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if det == 0.0 || det.abs() <= 1e-14 * frob.max(1.0).powi(d as i32) {
            return Err(Error::SingularMap(det));
        }
        Ok(AffineMap { dim, m, b, det })
    }

    pub fn identity(dim: Dimension) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate().take(dim.d()) {
            row[i] = 1.0;
        }
        AffineMap {
            dim,
            m,
            b: [0.0; 3],
            det: 1.0,
        }
    }

    pub fn scaling(dim: Dimension, s: f64) -> Result<Self> {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate().take(dim.d()) {
            row[i] = s;
        }
        Self::from_parts(dim, m, [0.0; 3])
    }

    pub fn translation(dim: Dimension, t: &[f64]) -> Result<Self> {
        let mut a = Self::identity(dim);
        a.b[..dim.d()].copy_from_slice(t);
        Ok(a)
    }

    /// Rotation by `angle` in the plane of coordinates `(i, j)`.
    pub fn plane_rotation(dim: Dimension, i: usize, j: usize, angle: f64) -> Self {
        let mut a = Self::identity(dim);
        let (s, c) = angle.sin_cos();
        a.m[i][i] = c;
        a.m[i][j] = -s;
        a.m[j][i] = s;
        a.m[j][j] = c;
        a
    }

    /// Random orthogonal map with determinant +1.
    pub fn random_rotation(dim: Dimension, rng: &mut impl Rng) -> Self {
        let d = dim.d();
        let mut q = random_orthonormal(rng, d);
        if determinant(&q, d) < 0.0 {
            for v in q[0].iter_mut() {
                *v = -*v;
            }
        }
        AffineMap {
            dim,
            m: q,
            b: [0.0; 3],
            det: 1.0,
        }
    }

    /// Random invertible map `R1 diag(σ) R2 + b` with singular values in
    /// `[1/cond, cond]^{1/2}`-ish range and translation in `[-1, 1]^d`.
    pub fn random_invertible(dim: Dimension, rng: &mut impl Rng, max_stretch: f64) -> Self {
        let d = dim.d();
        let r1 = random_orthonormal(rng, d);
        let r2 = random_orthonormal(rng, d);
        let sig: Vec<f64> = (0..d).map(|_| max_stretch.powf(rng.gen_range(-1.0..1.0))).collect();
        let mut m = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = (0..d).map(|l| r1[i][l] * sig[l] * r2[l][j]).sum();
            }
        }
        let mut b = [0.0; 3];
        for v in b.iter_mut().take(d) {
            *v = rng.gen_range(-1.0..1.0);
        }
        Self::from_parts(dim, m, b).expect("random map is invertible by construction")
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn translation_part(&self) -> &Point {
        &self.b
    }

    #[inline]
    pub fn apply(&self, x: &Point) -> Point {
        let d = self.dim.d();
        let mut y = [0.0; 3];
        for i in 0..d {
            let mut s = self.b[i];
            for j in 0..d {
                s += self.m[i][j] * x[j];
            }
            y[i] = s;
        }
        y
    }

    /// Linear part only.
    #[inline]
    pub fn apply_linear(&self, x: &Point) -> Point {
        let d = self.dim.d();
        let mut y = [0.0; 3];
        for i in 0..d {
            y[i] = (0..d).map(|j| self.m[i][j] * x[j]).sum();
        }
        y
    }

    pub fn inverse(&self) -> AffineMap {
        let d = self.dim.d();
        let m = &self.m;
        let mut inv = [[0.0; 3]; 3];
        if d == 2 {
            inv[0][0] = m[1][1] / self.det;
            inv[0][1] = -m[0][1] / self.det;
            inv[1][0] = -m[1][0] / self.det;
            inv[1][1] = m[0][0] / self.det;
        } else {
            for i in 0..3 {
                for j in 0..3 {
                    let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                    let (c, e) = ((i + 1) % 3, (i + 2) % 3);
                    inv[i][j] = (m[a][c] * m[b][e] - m[a][e] * m[b][c]) / self.det;
                }
            }
        }
        let mut b = [0.0; 3];
        for i in 0..d {
            b[i] = -(0..d).map(|j| inv[i][j] * self.b[j]).sum::<f64>();
        }
        AffineMap {
            dim: self.dim,
            m: inv,
            b,
            det: 1.0 / self.det,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let d = self.dim.d();
        let mut m = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = (0..d).map(|l| self.m[i][l] * other.m[l][j]).sum();
            }
        }
        let b = self.apply(&other.b);
        AffineMap {
            dim: self.dim,
            m,
            b,
            det: self.det * other.det,
        }
    }

    /// Frobenius norm of the linear part, an upper bound for its operator norm.
    pub fn linear_norm_bound(&self) -> f64 {
        let d = self.dim.d();
        (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| self.m[i][j].powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_and_compose_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [2, 3] {
            let dim = Dimension::new(d).unwrap();
            for _ in 0..20 {
                let a = AffineMap::random_invertible(dim, &mut rng, 3.0);
                let id = a.compose(&a.inverse());
                let x = [0.3, -1.2, 0.7];
                let y = id.apply(&x);
                for k in 0..d {
                    assert!((y[k] - x[k]).abs() < 1e-12);
                }
                assert!((id.det() - 1.0).abs() < 1e-12);
                assert!((determinant(&a.m, d) - a.det()).abs() < 1e-12 * a.det().abs());
            }
        }
    }

    #[test]
    fn singular_rejected() {
        let r = AffineMap::new(Dimension::TWO, &[1.0, 2.0, 2.0, 4.0], &[0.0, 0.0]);
        assert!(matches!(r, Err(Error::SingularMap(_))));
    }

    #[test]
    fn rotations_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = AffineMap::random_rotation(Dimension::THREE, &mut rng);
        assert!((r.det() - 1.0).abs() < 1e-14);
        assert!((determinant(&r.m, 3) - 1.0).abs() < 1e-12);
    }
}

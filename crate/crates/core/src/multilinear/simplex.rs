use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::grid::Point;

fn det(m: &[[f64; 3]; 3], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `(d−1)`-volume `Δ` of the simplex with vertices `x_1, …, x_d ∈ R^d`,
/// from the Gram determinant of the edge vectors.
pub fn simplex_volume(dim: Dimension, points: &[Point]) -> Result<f64> {
    let d = dim.d();
    if points.len() != d {
        return Err(Error::Invalid(format!("simplex volume needs {d} points")));
    }
    let mut e = [[0.0; 3]; 2];
    for j in 1..d {
        for k in 0..d {
            e[j - 1][k] = points[j][k] - points[0][k];
        }
    }
    let mut g = [[0.0; 3]; 3];
    for i in 0..d - 1 {
        for j in 0..d - 1 {
            g[i][j] = (0..d).map(|k| e[i][k] * e[j][k]).sum();
        }
    }
    Ok(det(&g, d - 1).max(0.0).sqrt() / factorial(d - 1))
}

/// Volume `Δ'` of the simplex with vertices `x'_1, …, x'_d ∈ R^{d−1}`
/// (the first `d−1` coordinates of each point are used).
pub fn simplex_volume_prime(dim: Dimension, points: &[Point]) -> Result<f64> {
    let d = dim.d();
    if points.len() != d {
        return Err(Error::Invalid(format!("simplex volume needs {d} points")));
    }
    Ok(edge_det(points, d).abs() / factorial(d - 1))
}

/// `det[x'_j − x'_1]_{j=2..d}`.
pub(crate) fn edge_det(points: &[Point], d: usize) -> f64 {
    let mut m = [[0.0; 3]; 3];
    for j in 1..d {
        for k in 0..d - 1 {
            m[j - 1][k] = points[j][k] - points[0][k];
        }
    }
    det(&m, d - 1)
}

/// Affine barycentric coefficients `v` with `x'_0 = Σ v_j x'_j`, `Σ v_j = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct VCoefficients {
    pub v: Vec<f64>,
    /// `|x'_0 − Σ v_j x'_j|`, a posteriori.
    pub residual: f64,
}

impl VCoefficients {
    pub fn sum(&self) -> f64 {
        self.v.iter().sum()
    }
}

/// Solves for `v` with the constraint eliminated (`v_1 = 1 − Σ_{j≥2} v_j`).
/// Configurations whose relative volume `Δ' / scale^{d−1}` is below 1e−12
/// are rejected with that ratio as diagnostic.
pub fn v_coeffs(dim: Dimension, x0: &Point, xs: &[Point]) -> Result<VCoefficients> {
    let d = dim.d();
    if xs.len() != d {
        return Err(Error::Invalid(format!("need {d} points x'_1..x'_d")));
    }
    let k = d - 1;
    let scale = xs
        .iter()
        .chain(std::iter::once(x0))
        .flat_map(|p| p[..k].iter().map(|c| c.abs()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let dt = edge_det(xs, d);
    let rel = dt.abs() / scale.powi(k as i32);
    if !(rel > 1e-12) {
        return Err(Error::Degenerate(rel));
    }
    // columns: x'_j − x'_1 for j = 2..d; right side x'_0 − x'_1
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for row in 0..k {
        for j in 1..d {
            m[row][j - 1] = xs[j][row] - xs[0][row];
        }
        rhs[row] = x0[row] - xs[0][row];
    }
    let mut v = vec![0.0; d];
    // Cramer's rule on the k×k system
    for col in 0..k {
        let mut mc = m;
        for row in 0..k {
            mc[row][col] = rhs[row];
        }
        v[col + 1] = det(&mc, k) / dt;
    }
    v[0] = 1.0 - v[1..].iter().sum::<f64>();
    let residual = (0..k)
        .map(|row| {
            let r = x0[row] - (0..d).map(|j| v[j] * xs[j][row]).sum::<f64>();
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(VCoefficients { v, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basic_volumes() {
        let d2 = Dimension::TWO;
        let a = simplex_volume(d2, &[[1.0, 2.0, 0.0], [4.0, 6.0, 0.0]]).unwrap();
        assert!((a - 5.0).abs() < 1e-14);
        let t = simplex_volume(Dimension::THREE, &[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
        let p = simplex_volume_prime(Dimension::THREE, &[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(simplex_volume(d2, &[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]]).unwrap(), 0.0);
    }

    #[test]
    fn lifted_graph_volume() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in [Dimension::TWO, Dimension::THREE] {
            let d = dim.d();
            for _ in 0..50 {
                let u: Vec<f64> = (0..d - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let a: f64 = rng.gen_range(-2.0..2.0);
                let pts: Vec<Point> = (0..d)
                    .map(|_| {
                        let mut x = [0.0; 3];
                        for k in 0..d - 1 {
                            x[k] = rng.gen_range(-2.0..2.0);
                        }
                        x[d - 1] = a + (0..d - 1).map(|k| u[k] * x[k]).sum::<f64>();
                        x
                    })
                    .collect();
                let lhs = simplex_volume(dim, &pts).unwrap();
                let u2: f64 = u.iter().map(|c| c * c).sum();
                let rhs = (1.0 + u2).sqrt() * simplex_volume_prime(dim, &pts).unwrap();
                assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs), "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn v_examples() {
        let d2 = Dimension::TWO;
        let v = v_coeffs(d2, &[0.0; 3], &[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(v.v, vec![0.5, 0.5]);
        let v = v_coeffs(d2, &[1.0, 0.0, 0.0], &[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(v.v, vec![1.0, 0.0]);
        assert!(matches!(
            v_coeffs(d2, &[0.3, 0.0, 0.0], &[[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn v_is_affine_in_x0_and_reconstructs() {
        let dim = Dimension::THREE;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let xs: Vec<Point> = (0..3)
                .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0])
                .collect();
            let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), 0.0];
            let q = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), 0.0];
            let Ok(vp) = v_coeffs(dim, &p, &xs) else { continue };
            assert!(vp.residual < 1e-10 && (vp.sum() - 1.0).abs() < 1e-12);
            let vq = v_coeffs(dim, &q, &xs).unwrap();
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]), 0.0];
            let vm = v_coeffs(dim, &mid, &xs).unwrap();
            for j in 0..3 {
                assert!((vm.v[j] - 0.5 * (vp.v[j] + vq.v[j])).abs() < 1e-9 * (1.0 + vp.v[j].abs() + vq.v[j].abs()));
            }
        }
    }
}

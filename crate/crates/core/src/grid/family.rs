use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, norm2, Point};
use crate::dim::Dimension;

/// Named closed-form families, evaluable exactly anywhere.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedFormFamily {
    /// `c (1 + |a x|^2)^{-d/2}`
    Extremizer {
        a: f64,
        c: f64,
    },
    /// `c (1 + |x'|^2 + (x_d + |x'|^2/2)^2)^{-d/2}`
    ParabolicExtremizer {
        c: f64,
    },
    /// `c exp(-|a x|^2)`
    Gaussian {
        a: f64,
        c: f64,
    },
    /// `c 1_{|x| < radius}`
    BallIndicator {
        radius: f64,
        c: f64,
    },
    RandomSmooth(RandomSmooth),
    /// Signed, smooth, compactly supported perturbation.
    Bump(CompactBump),
}

/// `x^{-d/2}` for the two supported dimensions.
#[inline]
fn inv_pow_half(t: f64, d: usize) -> f64 {
    if d == 2 {
        1.0 / t
    } else {
        1.0 / (t * t.sqrt())
    }
}

impl ClosedFormFamily {
    pub fn value(&self, x: &Point, d: usize) -> f64 {
        match self {
            ClosedFormFamily::Extremizer { a, c } => c * inv_pow_half(1.0 + a * a * norm2(x, d), d),
            ClosedFormFamily::ParabolicExtremizer { c } => {
                let xp = norm2(x, d - 1);
                let w = x[d - 1] + 0.5 * xp;
                c * inv_pow_half(1.0 + xp + w * w, d)
            }
            ClosedFormFamily::Gaussian { a, c } => c * (-a * a * norm2(x, d)).exp(),
            ClosedFormFamily::BallIndicator { radius, c } => {
                if norm2(x, d) < radius * radius {
                    *c
                } else {
                    0.0
                }
            }
            ClosedFormFamily::RandomSmooth(r) => r.value(x, d),
            ClosedFormFamily::Bump(b) => b.value(x, d),
        }
    }

    pub fn is_nonneg(&self) -> bool {
        !matches!(self, ClosedFormFamily::Bump(_))
    }

    /// True when the family is radial about the origin and nonincreasing
    /// in the radius.
    pub fn is_radial_decreasing(&self) -> bool {
        matches!(
            self,
            ClosedFormFamily::Extremizer { .. }
                | ClosedFormFamily::Gaussian { .. }
                | ClosedFormFamily::BallIndicator { .. }
        )
    }

    pub(crate) fn center_scale(&self, d: usize) -> (Point, f64) {
        match self {
            ClosedFormFamily::Extremizer { a, .. } | ClosedFormFamily::Gaussian { a, .. } => ([0.0; 3], 1.0 / a),
            ClosedFormFamily::ParabolicExtremizer { .. } => ([0.0; 3], 1.0),
            ClosedFormFamily::BallIndicator { radius, .. } => ([0.0; 3], radius * 0.5),
            ClosedFormFamily::RandomSmooth(r) => (r.mean, r.scale()),
            ClosedFormFamily::Bump(b) => {
                let _ = d;
                (b.center, b.width * 0.5)
            }
        }
    }

    pub(crate) fn support_radius(&self) -> Option<(Point, f64)> {
        match self {
            ClosedFormFamily::BallIndicator { radius, .. } => Some(([0.0; 3], *radius)),
            ClosedFormFamily::Bump(b) => Some((b.center, b.width)),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClosedFormFamily::Extremizer { .. } => "extremizer",
            ClosedFormFamily::ParabolicExtremizer { .. } => "parabolic_extremizer",
            ClosedFormFamily::Gaussian { .. } => "gaussian",
            ClosedFormFamily::BallIndicator { .. } => "ball_indicator",
            ClosedFormFamily::RandomSmooth(_) => "random_smooth",
            ClosedFormFamily::Bump(_) => "bump",
        }
    }
}

/// Uniformly random rotation-like orthonormal frame (Gram–Schmidt of a
/// random matrix), stored as rows.
pub(crate) fn random_orthonormal(rng: &mut impl Rng, d: usize) -> [[f64; 3]; 3] {
    loop {
        let mut q = [[0.0; 3]; 3];
        for row in q.iter_mut().take(d) {
            for v in row.iter_mut().take(d) {
                // Sum of uniforms: cheap, rotation-symmetric enough for test fields.
                *v = (0..4).map(|_| rng.gen_range(-1.0..1.0)).sum::<f64>();
            }
        }
        let mut ok = true;
        for i in 0..d {
            for j in 0..i {
                let pr = dot(&q[i], &q[j], d);
                for k in 0..d {
                    q[i][k] -= pr * q[j][k];
                }
            }
            let n = norm2(&q[i], d).sqrt();
            if n < 1e-3 {
                ok = false;
                break;
            }
            for k in 0..d {
                q[i][k] /= n;
            }
        }
        if ok {
            return q;
        }
    }
}

/// Positive trigonometric polynomial times an anisotropic Gaussian envelope:
/// `(1 + Σ a_j cos(ω_j·x + φ_j)) exp(-½ (x-μ)ᵀP(x-μ))` with `Σ|a_j| = 0.8`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSmooth {
    pub seed: u64,
    pub k: usize,
    amps: Vec<f64>,
    freqs: Vec<Point>,
    phases: Vec<f64>,
    mean: Point,
    precision: [[f64; 3]; 3],
    min_eig: f64,
}

impl RandomSmooth {
    pub fn new(dim: Dimension, seed: u64, k: usize) -> Self {
        let d = dim.d();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amps: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let total: f64 = amps.iter().map(|a| a.abs()).sum();
        if total > 0.0 {
            for a in &mut amps {
                *a *= 0.8 / total;
            }
        }
        let freqs = (0..k)
            .map(|_| {
                let mut w = [0.0; 3];
                for v in w.iter_mut().take(d) {
                    *v = rng.gen_range(-1.5..1.5);
                }
                w
            })
            .collect();
        let phases = (0..k).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let mut mean = [0.0; 3];
        for v in mean.iter_mut().take(d) {
            *v = rng.gen_range(-0.5..0.5);
        }
        let q = random_orthonormal(&mut rng, d);
        let eig: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..2.0)).collect();
        let mut precision = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                precision[i][j] = (0..d).map(|l| q[l][i] * eig[l] * q[l][j]).sum();
            }
        }
        let min_eig = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        RandomSmooth {
            seed,
            k,
            amps,
            freqs,
            phases,
            mean,
            precision,
            min_eig,
        }
    }

    pub fn mean(&self) -> Point {
        self.mean
    }

    pub fn scale(&self) -> f64 {
        1.0 / self.min_eig.sqrt()
    }

    pub fn value(&self, x: &Point, d: usize) -> f64 {
        let mut y = [0.0; 3];
        for k in 0..d {
            y[k] = x[k] - self.mean[k];
        }
        let mut quad = 0.0;
        for i in 0..d {
            for j in 0..d {
                quad += y[i] * self.precision[i][j] * y[j];
            }
        }
        let env = (-0.5 * quad).exp();
        if env == 0.0 {
            return 0.0;
        }
        let mut poly = 1.0;
        for j in 0..self.k {
            poly += self.amps[j] * (dot(&self.freqs[j], x, d) + self.phases[j]).cos();
        }
        poly * env
    }
}

/// Smooth signed perturbation supported in the ball `|x - center| < width`:
/// `(b_0 + Σ b_j cos(ω_j·(x-c) + φ_j)) exp(1 - 1/(1 - |x-c|^2/w^2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactBump {
    pub center: Point,
    pub width: f64,
    base: f64,
    amps: Vec<f64>,
    freqs: Vec<Point>,
    phases: Vec<f64>,
}

impl CompactBump {
    pub fn new(center: Point, width: f64, base: f64) -> Self {
        CompactBump {
            center,
            width,
            base,
            amps: Vec::new(),
            freqs: Vec::new(),
            phases: Vec::new(),
        }
    }

    pub fn random(dim: Dimension, seed: u64) -> Self {
        let d = dim.d();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut center = [0.0; 3];
        for v in center.iter_mut().take(d) {
            *v = rng.gen_range(-1.0..1.0);
        }
        let width = rng.gen_range(0.5..1.5);
        let base = rng.gen_range(-1.0..1.0);
        let k = 3;
        let amps = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let freqs = (0..k)
            .map(|_| {
                let mut w = [0.0; 3];
                for v in w.iter_mut().take(d) {
                    *v = rng.gen_range(-3.0..3.0);
                }
                w
            })
            .collect();
        let phases = (0..k).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        CompactBump {
            center,
            width,
            base,
            amps,
            freqs,
            phases,
        }
    }

    pub fn value(&self, x: &Point, d: usize) -> f64 {
        let mut y = [0.0; 3];
        for k in 0..d {
            y[k] = x[k] - self.center[k];
        }
        let z2 = norm2(&y, d) / (self.width * self.width);
        if z2 >= 1.0 {
            return 0.0;
        }
        let env = (1.0 - 1.0 / (1.0 - z2)).exp();
        let mut poly = self.base;
        for j in 0..self.amps.len() {
            poly += self.amps[j] * (dot(&self.freqs[j], &y, d) + self.phases[j]).cos();
        }
        poly * env
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_point_values() {
        let e = ClosedFormFamily::Extremizer { a: 1.0, c: 1.0 };
        assert_eq!(e.value(&[0.0; 3], 2), 1.0);
        assert_eq!(e.value(&[1.0, 0.0, 0.0], 2), 0.5);
        let b = ClosedFormFamily::BallIndicator { radius: 1.0, c: 1.0 };
        assert_eq!(b.value(&[2.0, 0.0, 0.0], 2), 0.0);
        assert_eq!(b.value(&[0.5, 0.0, 0.0], 2), 1.0);
    }

    #[test]
    fn random_smooth_is_positive_and_reproducible() {
        let dim = Dimension::TWO;
        let a = RandomSmooth::new(dim, 42, 5);
        let b = RandomSmooth::new(dim, 42, 5);
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), 0.0];
            let v = a.value(&x, 2);
            assert!(v > 0.0 || v == 0.0 && a.value(&a.mean(), 2) > 0.0);
        }
    }

    #[test]
    fn bump_vanishes_off_support() {
        let b = CompactBump::random(Dimension::TWO, 3);
        let mut far = b.center;
        far[0] += b.width * 1.0001;
        assert_eq!(b.value(&far, 2), 0.0);
    }
}

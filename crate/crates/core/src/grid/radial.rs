use crate::dim::Dimension;
use crate::error::{Error, Result};

/// Radial profile on cells `[e_i, e_{i+1})` of a sinh-mapped radius grid
/// `e_i = ρ₀ sinh(i Δ)`, uniform near the origin and geometric far out.
///
/// The profile is the step function with value `values[i]` on cell `i`;
/// pointwise evaluation interpolates linearly between cell nodes so that
/// plots and fits see a continuous curve.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    dim: Dimension,
    edges: Vec<f64>,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl RadialProfile {
    /// Layout with `n` cells spanning `[0, rho_max]`.
    pub fn sinh_layout(dim: Dimension, n: usize, rho0: f64, rho_max: f64) -> Result<Self> {
        if n < 4 || !(rho0 > 0.0) || !(rho_max > rho0) {
            return Err(Error::Invalid(
                "radial layout needs n >= 4 and 0 < rho0 < rho_max".into(),
            ));
        }
        let du = (rho_max / rho0).asinh() / n as f64;
        let edges: Vec<f64> = (0..=n).map(|i| rho0 * (i as f64 * du).sinh()).collect();
        let nodes: Vec<f64> = (0..n).map(|i| rho0 * ((i as f64 + 0.5) * du).sinh()).collect();
        Ok(RadialProfile {
            dim,
            edges,
            nodes,
            values: vec![0.0; n],
        })
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.nodes.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(
                "radial profile values must be finite, one per cell".into(),
            ));
        }
        Ok(RadialProfile { values, ..self.clone() })
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        RadialProfile {
            values: self.values.iter().map(|v| f(*v)).collect(),
            ..self.clone()
        }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn rho_max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Measures of the spherical shells `{e_i <= |x| < e_{i+1}}`.
    pub fn shell_measures(&self) -> Vec<f64> {
        let d = self.dim.d() as i32;
        let c = self.dim.sphere_area() / d as f64;
        self.edges
            .windows(2)
            .map(|w| c * (w[1].powi(d) - w[0].powi(d)))
            .collect()
    }

    /// `(Σ_i |v_i|^p |shell_i|)^{1/p}`, exact for the step profile.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let w = self.shell_measures();
        let s = crate::quad::compensated_sum(self.values.iter().zip(&w).map(|(v, w)| v.abs().powf(p) * w));
        s.powf(1.0 / p)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn value_at_radius(&self, rho: f64) -> f64 {
        let n = self.nodes.len();
        if rho >= self.edges[n] {
            return 0.0;
        }
        if rho <= self.nodes[0] {
            return self.values[0];
        }
        if rho >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let i = self.nodes.partition_point(|x| *x <= rho) - 1;
        let t = (rho - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    /// Radius at which the profile first drops below half its maximum.
    pub fn scale_hint(&self) -> f64 {
        let m = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if m == 0.0 {
            return 1.0;
        }
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() < 0.5 * m {
                return self.nodes[i].max(self.nodes[0]);
            }
        }
        1.0
    }
}

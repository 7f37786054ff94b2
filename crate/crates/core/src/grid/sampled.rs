use rayon::prelude::*;

use super::{Field, Point};
use crate::dim::Dimension;
use crate::error::{Error, Result};

/// Uniform cell-centered lattice on `[-R, R]^d` with `N` cells per axis.
///
/// Values are stored row-major (first coordinate slowest). Evaluation is
/// multilinear between cell centers, constant in the outer half cells, and
/// falls back to `exterior` (or 0) outside the box.
#[derive(Clone, Debug)]
pub struct GridData {
    dim: Dimension,
    n: usize,
    r: f64,
    h: f64,
    values: Vec<f64>,
    exterior: Option<Field>,
}

impl GridData {
    pub fn new(dim: Dimension, n: usize, r: f64, values: Vec<f64>) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Invalid(format!("grid size N = {n} must be even and at least 2")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Invalid("grid radius must be positive".into()));
        }
        if values.len() != n.pow(dim.d() as u32) {
            return Err(Error::Invalid("value table has the wrong length".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("grid values must be finite".into()));
        }
        Ok(GridData {
            dim,
            n,
            r,
            h: 2.0 * r / n as f64,
            values,
            exterior: None,
        })
    }

    /// Samples `f` at the cell centers.
    pub fn sample(f: &Field, n: usize, r: f64) -> Result<Self> {
        let dim = f.dim();
        let probe = GridData::new(dim, n, r, vec![0.0; n.pow(dim.d() as u32)])?;
        let values: Vec<f64> = (0..probe.len())
            .into_par_iter()
            .map(|i| f.value(&probe.center(i)))
            .collect();
        GridData::new(dim, n, r, values)
    }

    /// Samples `f` and keeps `f` itself as the exterior fallback.
    pub fn sample_with_exterior(f: &Field, n: usize, r: f64) -> Result<Self> {
        let mut g = GridData::sample(f, n, r)?;
        g.exterior = Some(f.clone());
        Ok(g)
    }

    pub fn with_exterior(mut self, exterior: Option<Field>) -> Self {
        self.exterior = exterior;
        self
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn exterior(&self) -> Option<&Field> {
        self.exterior.as_ref()
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Measure of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim.d() as i32)
    }

    /// Coordinate of cell index `i` along an axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.r + (i as f64 + 0.5) * self.h
    }

    /// Multi-index of a flat index.
    #[inline]
    pub fn unflatten(&self, mut i: usize) -> [usize; 3] {
        let d = self.dim.d();
        let mut idx = [0usize; 3];
        for k in (0..d).rev() {
            idx[k] = i % self.n;
            i /= self.n;
        }
        idx
    }

    #[inline]
    pub fn flatten(&self, idx: &[usize; 3]) -> usize {
        let d = self.dim.d();
        let mut i = 0;
        for &ik in idx.iter().take(d) {
            i = i * self.n + ik;
        }
        i
    }

    /// Center of the cell with flat index `i`.
    #[inline]
    pub fn center(&self, i: usize) -> Point {
        let idx = self.unflatten(i);
        let mut x = [0.0; 3];
        for k in 0..self.dim.d() {
            x[k] = self.coord(idx[k]);
        }
        x
    }

    #[inline]
    pub fn contains(&self, x: &Point) -> bool {
        (0..self.dim.d()).all(|k| x[k].abs() <= self.r)
    }

    /// Multilinear interpolation inside the box (no exterior lookup). The
    /// half cell between the outer centers and the box edge is linearly
    /// extrapolated.
    #[inline]
    pub fn interpolate(&self, x: &Point) -> f64 {
        let d = self.dim.d();
        let n = self.n;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for k in 0..d {
            let u = ((x[k] + self.r) / self.h - 0.5).clamp(-0.5, n as f64 - 0.5);
            let i0 = (u.max(0.0).floor() as usize).min(n - 2);
            base[k] = i0;
            frac[k] = u - i0 as f64;
        }
        if d == 2 {
            let i = base[0] * n + base[1];
            let (fx, fy) = (frac[0], frac[1]);
            let v = &self.values;
            (1.0 - fx) * ((1.0 - fy) * v[i] + fy * v[i + 1]) + fx * ((1.0 - fy) * v[i + n] + fy * v[i + n + 1])
        } else {
            let mut acc = 0.0;
            for corner in 0..8usize {
                let mut w = 1.0;
                let mut idx = 0usize;
                for k in 0..3 {
                    let bit = corner >> (2 - k) & 1;
                    w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                    idx = idx * n + base[k] + bit;
                }
                if w != 0.0 {
                    acc += w * self.values[idx];
                }
            }
            acc
        }
    }

    #[inline]
    pub fn value(&self, x: &Point) -> f64 {
        if self.contains(x) {
            self.interpolate(x)
        } else {
            match &self.exterior {
                Some(e) => e.value(x),
                None => 0.0,
            }
        }
    }

    /// Line parameters where `o + t u` crosses the box boundary.
    pub fn box_crossings(&self, o: &Point, u: &Point, out: &mut Vec<f64>) {
        let d = self.dim.d();
        let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 0..d {
            if u[k] == 0.0 {
                if o[k].abs() > self.r {
                    return;
                }
                continue;
            }
            let a = (-self.r - o[k]) / u[k];
            let b = (self.r - o[k]) / u[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        if t1 > t0 {
            out.push(t0);
            out.push(t1);
        }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64 + Sync, exterior: Option<Field>) -> GridData {
        GridData {
            values: self.values.par_iter().map(|v| f(*v)).collect(),
            exterior,
            ..self.clone()
        }
    }

    pub(crate) fn with_values(&self, values: Vec<f64>, exterior: Option<Field>) -> GridData {
        debug_assert_eq!(values.len(), self.values.len());
        GridData {
            values,
            exterior,
            ..self.clone()
        }
    }

    /// Same lattice, values from `f` evaluated at the centers.
    pub fn resample(&self, f: &Field) -> GridData {
        let values = (0..self.len())
            .into_par_iter()
            .map(|i| f.value(&self.center(i)))
            .collect();
        self.with_values(values, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_sizes() {
        assert!(GridData::new(Dimension::TWO, 3, 1.0, vec![0.0; 9]).is_err());
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let g = GridData::new(Dimension::TWO, 8, 2.0, vec![0.0; 64]).unwrap();
        let vals: Vec<f64> = (0..64)
            .map(|i| {
                let c = g.center(i);
                1.0 + 2.0 * c[0] - 0.5 * c[1]
            })
            .collect();
        let g = g.with_values(vals, None);
        for x in [[0.1, 0.3, 0.0], [-1.6, 1.7, 0.0], [1.2, -0.05, 0.0], [1.95, -1.9, 0.0]] {
            assert!((g.interpolate(&x) - (1.0 + 2.0 * x[0] - 0.5 * x[1])).abs() < 1e-12);
        }
        assert_eq!(g.value(&[2.5, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn interpolation_3d_trilinear() {
        let g = GridData::new(Dimension::THREE, 4, 1.0, vec![0.0; 64]).unwrap();
        let vals: Vec<f64> = (0..64)
            .map(|i| {
                let c = g.center(i);
                c[0] - 2.0 * c[1] + 3.0 * c[2] + c[0] * c[1] * c[2]
            })
            .collect();
        let g = g.with_values(vals, None);
        let x = [0.1, -0.3, 0.2];
        let want = x[0] - 2.0 * x[1] + 3.0 * x[2] + x[0] * x[1] * x[2];
        assert!((g.interpolate(&x) - want).abs() < 1e-12);
    }

    #[test]
    fn flatten_round_trip() {
        let g = GridData::new(Dimension::THREE, 4, 1.0, vec![0.0; 64]).unwrap();
        for i in 0..64 {
            assert_eq!(g.flatten(&g.unflatten(i)), i);
        }
    }
}

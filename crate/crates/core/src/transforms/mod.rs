//! ℛ, ℛ♯, 𝒞 and their adjoints, the shear Ψ*, the swap ℒ, the inversion 𝒥
//! and the incidence pairing.
//!
//! Closed-form inputs produce lazy fields whose values are computed on
//! demand by double-exponential quadrature along each fiber. Grid inputs
//! produce grids on the same lattice, using the midpoint rule with the grid
//! spacing inside the box and, in `d = 2`, the exterior fallback outside.

mod fiber;
mod incidence;
mod radon;

pub use fiber::fiber_value;
pub use incidence::{
    incidence_density, incidence_density_norm, incidence_form, incidence_limit, incidence_pairing, IncidenceReport,
};
pub use radon::{hyperplane_frame, radon, radon_at, radon_norm, sinogram_norm, Sinogram, SinogramLayout};

use rayon::prelude::*;

use crate::grid::{FiberOp, Field, GridData};
use crate::quad::QuadSettings;

/// Quadrature controls shared by the transforms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformConfig {
    /// Adaptive rule for closed-form fibers and exterior tails.
    pub quad: QuadSettings,
    /// Use the exterior fallback of grid inputs; when false only the box
    /// contributes.
    pub analytic_tails: bool,
    /// Direction counts for the closed-form ℛ norm (angles in `d = 2`,
    /// product-rule points in `d = 3`).
    pub min_directions: usize,
    pub max_directions: usize,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            quad: QuadSettings::default(),
            analytic_tails: true,
            min_directions: 16,
            max_directions: 4096,
        }
    }
}

impl TransformConfig {
    pub fn with_quad(quad: QuadSettings) -> Self {
        TransformConfig {
            quad,
            ..Self::default()
        }
    }

    /// Fixed-level rules (no refinement) at the given DE level; used where
    /// nested `d = 3` integrals would otherwise be too expensive.
    pub fn fixed_level(level: u32) -> Self {
        TransformConfig {
            quad: QuadSettings {
                tol: 1e-6,
                abs_tol: 1e-300,
                min_level: level,
                max_level: level,
                ..QuadSettings::default()
            },
            analytic_tails: true,
            min_directions: 32,
            max_directions: 512,
        }
    }

    /// `f` with its exterior fallback dropped when tails are disabled.
    fn source(&self, f: &Field) -> Field {
        match f.as_grid() {
            Some(g) if !self.analytic_tails && g.exterior().is_some() => {
                Field::from_grid(g.clone().with_exterior(None))
            }
            _ => f.clone(),
        }
    }
}

fn apply_fiber(f: &Field, op: FiberOp, cfg: &TransformConfig) -> Field {
    if f.is_zero() {
        return f.clone();
    }
    let src = cfg.source(f);
    let Some(g) = src.as_grid() else {
        return src.fiber_lazy(op, cfg.quad);
    };
    if g.dim().d() == 3 && g.exterior().is_some() {
        log::warn!("d = 3 grid transforms integrate the box only; the exterior fallback is ignored");
    }
    let lazy = src.fiber_lazy(op, cfg.quad);
    let values: Vec<f64> = (0..g.len()).into_par_iter().map(|i| lazy.value(&g.center(i))).collect();
    let exterior = g.exterior().map(|e| e.fiber_lazy(op, cfg.quad));
    Field::from_grid(g.with_values(values, exterior))
}

/// `ℛ♯f(x) = ∫ f(y', x_d + y'·x') dy'`.
pub fn rsharp(f: &Field, cfg: &TransformConfig) -> Field {
    apply_fiber(f, FiberOp::Flat, cfg)
}

/// `ℛ♯*g(y) = ∫ g(x', y_d − y'·x') dx'`.
pub fn rsharp_adjoint(g: &Field, cfg: &TransformConfig) -> Field {
    apply_fiber(g, FiberOp::FlatAdjoint, cfg)
}

/// `𝒞f(x) = ∫ f(x' − y', x_d − ½|y'|²) dy'`.
pub fn cconv(f: &Field, cfg: &TransformConfig) -> Field {
    apply_fiber(f, FiberOp::Conv, cfg)
}

/// `𝒞*g(x) = ∫ g(x' + y', x_d + ½|y'|²) dy'`.
pub fn cconv_adjoint(g: &Field, cfg: &TransformConfig) -> Field {
    apply_fiber(g, FiberOp::ConvAdjoint, cfg)
}

/// Re-evaluates a lazy view of a grid field on its own lattice.
fn regrid(f: &Field, lazy: Field, exterior: Option<Field>) -> Field {
    match f.as_grid() {
        Some(g) => {
            let values: Vec<f64> = (0..g.len()).into_par_iter().map(|i| lazy.value(&g.center(i))).collect();
            Field::from_grid(g.with_values(values, exterior))
        }
        None => lazy,
    }
}

/// `Ψ*f(x) = f(x', x_d − ½|x'|²)`.
pub fn psi_pullback(f: &Field) -> Field {
    let ext = f.as_grid().and_then(|g| g.exterior()).map(|e| e.shear_lazy(-1.0));
    regrid(f, f.shear_lazy(-1.0), ext)
}

/// `(Ψ⁻¹)*f(x) = f(x', x_d + ½|x'|²)`.
pub fn psi_inverse(f: &Field) -> Field {
    let ext = f.as_grid().and_then(|g| g.exterior()).map(|e| e.shear_lazy(1.0));
    regrid(f, f.shear_lazy(1.0), ext)
}

/// Exchange of the last two coordinates; exact on grids.
pub fn l_swap(f: &Field) -> Field {
    let Some(g) = f.as_grid() else {
        return f.swap_lazy();
    };
    let d = g.dim().d();
    let values: Vec<f64> = (0..g.len())
        .map(|i| {
            let mut idx = g.unflatten(i);
            idx.swap(d - 2, d - 1);
            g.values()[g.flatten(&idx)]
        })
        .collect();
    Field::from_grid(g.with_values(values, g.exterior().map(|e| e.swap_lazy())))
}

/// `𝒥f(u, s, t) = |s|^{-d} f(u/s, 1/s, t/s)` with `s` the second-to-last
/// coordinate. Grids are resampled on the same lattice; points whose
/// preimage leaves the box use the exterior fallback, or 0 without one.
pub fn j_involution(f: &Field) -> Field {
    if let Some(g) = f.as_grid() {
        if g.exterior().is_none() {
            log::warn!("inversion of a grid without exterior fallback: preimages outside the box read as 0");
        }
    }
    let ext = f.as_grid().and_then(|g| g.exterior()).map(|e| e.inversion_lazy());
    regrid(f, f.inversion_lazy(), ext)
}

/// Samples `f` (any backend) on an `N`-cell lattice of `[-R, R]^d`.
pub fn sample_grid(f: &Field, n: usize, r: f64, keep_exterior: bool) -> crate::error::Result<Field> {
    let g = if keep_exterior {
        GridData::sample_with_exterior(f, n, r)?
    } else {
        GridData::sample(f, n, r)?
    };
    Ok(Field::from_grid(g))
}

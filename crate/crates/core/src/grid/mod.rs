//! Field representations, affine maps, direction grids and L^p norms.

mod affine;
pub(crate) mod curve;
mod directions;
mod family;
mod field;
mod io;
mod norm;
mod radial;
mod sampled;
mod spec;

pub use affine::AffineMap;
pub use directions::{make_direction_grid, DirectionGrid, DirectionRule};
pub use family::{ClosedFormFamily, CompactBump, RandomSmooth};
pub use field::{Body, FiberOp, Field, Geometry};
pub use io::{read_grid_csv, write_grid_csv};
pub use norm::{integrate_field, integrate_over_space, lp_norm, lp_norm_with};
pub use radial::RadialProfile;
pub use sampled::GridData;
pub use spec::{parse_field_spec, FieldSpec};

/// A point of `R^d`, stored with `d <= 3` active coordinates; unused
/// trailing coordinates are zero.
pub type Point = [f64; 3];

/// Copies a slice of length `d` into a [`Point`].
pub fn point(x: &[f64]) -> Point {
    let mut p = [0.0; 3];
    p[..x.len()].copy_from_slice(x);
    p
}

#[inline]
pub(crate) fn dot(a: &Point, b: &Point, d: usize) -> f64 {
    (0..d).map(|k| a[k] * b[k]).sum()
}

#[inline]
pub(crate) fn norm2(a: &Point, d: usize) -> f64 {
    dot(a, a, d)
}

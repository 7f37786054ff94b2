//! Numerical toolkit for the endpoint `L^{(d+1)/d} → L^{d+1}` Radon
//! inequality in `d = 2, 3`: field representations, the Radon transform and
//! its parabolic variants, rearrangements, multilinear forms and the
//! extremizer search.

// `!(x > 0.0)` deliberately rejects NaN; index loops mirror the formulas
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dim;
pub mod error;
pub mod extremal;
pub mod grid;
pub mod multilinear;
pub mod quad;
pub mod symmetrization;
pub mod tolerances;
pub mod transforms;

pub(crate) mod poly;

pub use dim::Dimension;
pub use error::{Error, Result};
pub use grid::{
    lp_norm, make_direction_grid, parse_field_spec, point, AffineMap, ClosedFormFamily, DirectionGrid, DirectionRule,
    Field, FieldSpec, GridData, Point, RadialProfile,
};
pub use quad::QuadSettings;
pub use transforms::{Sinogram, SinogramLayout, TransformConfig};

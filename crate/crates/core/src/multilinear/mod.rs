//! Simplex volumes and v-coefficients, exact `T_v` forms with
//! rearrangement and equality tests, and the Monte Carlo multilinear form.

mod drury;
mod simplex;
mod step;
mod tv;

pub use drury::{drury_form, drury_form_with, DruryConfig, DruryEstimate, DrurySampler, MultilinearSample};
pub use simplex::{simplex_volume, simplex_volume_prime, v_coeffs, VCoefficients};
pub use step::{ratio, rational, Rational, StepFunction1D};
pub use tv::{
    admissibility, burchard_equality_test, slab_box_volume, slab_rectangle_area, tv_form, AdmissibilityReport,
    BurchardVerdict,
};

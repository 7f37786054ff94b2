//! Φ_R and Φ_C, Euler–Lagrange residuals, stationarity probes, the
//! extremizer search and the checks applied to its output.

mod el;
mod functional;
mod probe;
mod profile;
mod search;

pub use el::{el_residual, ElConfig, ElExponent, ElReport, OperatorPair};
pub use functional::{phi_conv, phi_radon, FunctionalReport};
pub use probe::{stationarity_probe, ProbeReport};
pub use profile::{fit_affine_profile, tail_decay_check, AffineFit, TailReport};
pub use search::{search_extremizer, Picture, SearchConfig, SearchMethod, SearchState};

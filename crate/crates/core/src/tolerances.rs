//! Tolerances shared by the acceptance suite, the CLI checks and the tests.

/// `Φ_R` of the extremizer against the sharp constant.
pub const SHARP_CONSTANT_REL: f64 = 1e-2;
/// `‖ℛf‖ = ‖ℛ♯f‖` in `d = 2`.
pub const FLAT_NORM_REL_D2: f64 = 1e-2;
/// `‖ℛf‖ = ‖ℛ♯f‖` in `d = 3`.
pub const FLAT_NORM_REL_D3: f64 = 3e-2;
/// `𝒞 = Ψ*∘ℛ♯∘Ψ*`, pointwise.
pub const CONJUGACY_POINTWISE: f64 = 1e-3;
/// `‖𝒥f‖_p = ‖f‖_p` on closed forms.
pub const INVERSION_NORM: f64 = 1e-6;
/// `ℒ∘ℛ♯ = ℛ♯∘𝒥` on grids, pointwise.
pub const INTERTWINING_POINTWISE: f64 = 1e-2;
/// `𝒥` of the extremizer, pointwise.
pub const INVERSION_FIXED_POINT: f64 = 1e-12;
/// Monte Carlo estimate within this many standard errors.
pub const DRURY_SIGMAS: f64 = 3.0;
/// Largest admissible standard error relative to the value.
pub const DRURY_SE_REL: f64 = 2e-2;
/// Slack on `Φ_R(f) ≤ Φ_R(f*)`.
pub const REARRANGEMENT_SLACK: f64 = 1e-3;
/// `|α| ≤ STATIONARITY_ALPHA · Φ` for the stationarity probe.
pub const STATIONARITY_ALPHA: f64 = 1e-2;
/// Final search `Φ` against the sharp constant.
pub const SEARCH_PHI_REL: f64 = 5e-3;
/// Allowed decrease of `Φ` per search step.
pub const SEARCH_MONOTONE: f64 = 1e-6;
/// Largest deviation of the search output from the affine profile.
pub const PROFILE_DEVIATION: f64 = 2e-2;
/// Required residual drop per grid refinement.
pub const EL_REFINEMENT_FACTOR: f64 = 2.0;
/// Band for consecutive tail ratios.
pub const TAIL_RATIO_BAND: (f64, f64) = (0.8, 1.25);
/// Tolerance of the exact Burchard evaluator.
pub const BURCHARD_EXACT: f64 = 1e-12;

/// `2^{-1/3} π^{2/3}`, the sharp constant of `Φ_R` in `d = 2`.
pub fn sharp_constant_d2() -> f64 {
    2f64.powf(-1.0 / 3.0) * std::f64::consts::PI.powf(2.0 / 3.0)
}

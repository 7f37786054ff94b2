use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::grid::{lp_norm, make_direction_grid, Field, RadialProfile};
use crate::quad::compensated_sum;
use crate::symmetrization::{radial_rearrange, rearrange_onto_shells};
use crate::transforms::{cconv, cconv_adjoint, psi_inverse, psi_pullback, sample_grid, TransformConfig};

/// Where the fixed-point iteration runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SearchMethod {
    /// Radial step profiles in the ℛ picture on `cells` shells of a
    /// sinh-mapped radius grid reaching `rho_max`. The discrete operator is
    /// the exact cell-averaged ℛ of each shell and its weighted transpose.
    Radial { cells: usize, rho0: f64, rho_max: f64 },
    /// `f ← (𝒞*[(𝒞f)^d])^d` on an `n`-cell grid of `[-r, r]^d` in the 𝒞
    /// picture, optionally rearranged in Ψ-coordinates every `rearrange_every`
    /// steps.
    ConvGrid {
        n: usize,
        r: f64,
        rearrange_every: Option<usize>,
    },
}

impl Default for SearchMethod {
    fn default() -> Self {
        SearchMethod::Radial {
            cells: 256,
            rho0: 0.05,
            rho_max: 1e4,
        }
    }
}

impl SearchMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SearchMethod::Radial { .. } => "radial",
            SearchMethod::ConvGrid { .. } => "conv-grid",
        }
    }
}

/// How the start field is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Picture {
    /// A candidate for Φ_R.
    #[default]
    Radon,
    /// A candidate for Φ_C (e.g. a parabolic extremizer).
    Conv,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub method: SearchMethod,
    /// Stop once `|ΔΦ|` falls below this.
    pub tol: f64,
    /// Allowed decrease of Φ per step before a step is rejected.
    pub monotone_tol: f64,
    pub picture: Picture,
    pub transform: TransformConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            method: SearchMethod::default(),
            tol: 1e-6,
            monotone_tol: 1e-6,
            picture: Picture::Radon,
            transform: TransformConfig::default(),
        }
    }
}

/// Iteration record. `phi_history[0]` is the start; entry `k` follows step `k`.
#[derive(Clone, Debug)]
pub struct SearchState {
    /// Current iterate in the ℛ picture.
    pub field: Field,
    pub iterations: usize,
    pub phi_history: Vec<f64>,
    /// `‖f_k − f_{k−1}‖_p` of normalized iterates.
    pub residual_history: Vec<f64>,
    /// Normalization constant applied at each step.
    pub lambda_history: Vec<f64>,
    pub step_times: Vec<Duration>,
    /// Steps rejected for lowering Φ by more than the tolerance.
    pub violations: Vec<usize>,
    pub converged: bool,
    pub method: &'static str,
}

impl SearchState {
    pub fn phi(&self) -> f64 {
        *self.phi_history.last().unwrap()
    }

    /// Largest decrease between consecutive accepted steps.
    pub fn max_decrease(&self) -> f64 {
        self.phi_history.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
    }
}

/// One normalized fixed-point step.
struct Step<T> {
    next: T,
    lambda: f64,
    residual: f64,
}

trait Iteration {
    type State: Clone;
    fn phi(&self, f: &Self::State) -> Result<f64>;
    fn step(&self, f: &Self::State, k: usize) -> Result<Step<Self::State>>;
    fn field(&self, f: &Self::State) -> Result<Field>;
}

fn run<I: Iteration>(
    it: &I,
    start: I::State,
    iters: usize,
    cfg: &SearchConfig,
    method: &'static str,
) -> Result<SearchState> {
    let mut f = start;
    let mut phi = it.phi(&f)?;
    check_phi(phi, 0)?;
    let mut st = SearchState {
        field: Field::zero(Dimension::TWO),
        iterations: 0,
        phi_history: vec![phi],
        residual_history: Vec::new(),
        lambda_history: Vec::new(),
        step_times: Vec::new(),
        violations: Vec::new(),
        converged: false,
        method,
    };
    for k in 1..=iters {
        let t0 = Instant::now();
        let s = it.step(&f, k)?;
        let next_phi = it.phi(&s.next)?;
        check_phi(next_phi, k)?;
        if next_phi < phi - cfg.monotone_tol {
            log::warn!("step {k} lowers phi from {phi} to {next_phi}; rejected");
            st.violations.push(k);
            break;
        }
        st.phi_history.push(next_phi);
        st.residual_history.push(s.residual);
        st.lambda_history.push(s.lambda);
        st.step_times.push(t0.elapsed());
        st.iterations = k;
        f = s.next;
        let done = (next_phi - phi).abs() < cfg.tol;
        phi = next_phi;
        if done {
            st.converged = true;
            break;
        }
    }
    st.field = it.field(&f)?;
    Ok(st)
}

fn check_phi(phi: f64, k: usize) -> Result<()> {
    if !phi.is_finite() || phi <= 1e-300 {
        return Err(Error::Divergence(format!("phi = {phi} at step {k}")));
    }
    Ok(())
}

/// Fixed-point search for an extremizer of Φ_R (see [`SearchMethod`]).
pub fn search_extremizer(start: &Field, iters: usize, cfg: &SearchConfig) -> Result<SearchState> {
    if start.is_zero() {
        return Err(Error::ZeroField);
    }
    match cfg.method {
        SearchMethod::Radial { cells, rho0, rho_max } => {
            let layout = RadialProfile::sinh_layout(start.dim(), cells, rho0, rho_max)?;
            let f = match cfg.picture {
                Picture::Radon => start.clone(),
                Picture::Conv => psi_pullback(start),
            };
            let p0 = radial_start(&f, &layout)?;
            let it = RadialIteration::new(layout);
            let p0 = it.normalize(p0.values().to_vec()).0;
            run(&it, p0, iters, cfg, cfg.method.name())
        }
        SearchMethod::ConvGrid { n, r, rearrange_every } => {
            let f = match cfg.picture {
                Picture::Radon => psi_inverse(start),
                Picture::Conv => start.clone(),
            };
            let g = sample_grid(&f, n, r, false)?;
            if g.as_grid().unwrap().values().iter().any(|v| *v < 0.0) {
                return Err(Error::NegativeInput);
            }
            let it = ConvIteration {
                cfg: cfg.transform,
                every: rearrange_every,
            };
            let norm = lp_norm(&g, g.dim().p())?;
            if !(norm > 0.0) {
                return Err(Error::ZeroField);
            }
            run(&it, g.scaled(1.0 / norm), iters, cfg, cfg.method.name())
        }
    }
}

/// Rearranged start profile: `f` sampled at the shell nodes along a set of
/// directions, each sample carrying its share of the shell measure.
fn radial_start(f: &Field, layout: &RadialProfile) -> Result<RadialProfile> {
    let dim = f.dim();
    let d = dim.d();
    let nodes = layout.nodes();
    let w = layout.shell_measures();
    if f.is_radial_decreasing() {
        let vals = nodes.iter().map(|r| f.value(&[*r, 0.0, 0.0])).collect();
        return layout.with_values(vals);
    }
    if let Some(p) = f.as_radial() {
        let vals: Vec<f64> = nodes.iter().map(|r| p.value_at_radius(*r)).collect();
        if vals.iter().any(|v| *v < 0.0) {
            return Err(Error::NegativeInput);
        }
        let cells = vals.iter().copied().zip(w.iter().copied()).collect();
        return layout.with_values(rearrange_onto_shells(cells, &w));
    }
    let dirs = make_direction_grid(dim, if d == 2 { 256 } else { 512 })?;
    let area = dim.sphere_area();
    let cells: Vec<(f64, f64)> = nodes
        .par_iter()
        .zip(w.par_iter())
        .flat_map_iter(|(r, wi)| {
            dirs.points().iter().zip(dirs.weights()).map(move |(u, wu)| {
                let x = [r * u[0], r * u[1], r * u[2]];
                (f.value(&x), wi * wu / area)
            })
        })
        .collect();
    if cells.iter().any(|c| c.0 < 0.0 || !c.0.is_finite()) {
        return Err(Error::NegativeInput);
    }
    layout.with_values(rearrange_onto_shells(cells, &w))
}

/// `F(r, b) = ∫_0^{min(r,b)} ℛ1_{B_b}(s) ds`.
fn cap_integral(r: f64, b: f64, d: usize) -> f64 {
    let r = r.min(b);
    if d == 2 {
        let s = (b * b - r * r).max(0.0).sqrt();
        let ratio = if b > 0.0 { (r / b).clamp(-1.0, 1.0) } else { 0.0 };
        r * s + b * b * ratio.asin()
    } else {
        std::f64::consts::PI * (b * b * r - r * r * r / 3.0)
    }
}

struct RadialIteration {
    layout: RadialProfile,
    /// `kernel[k·n + i]`: mean over r-cell `k` of ℛ of the shell `i` indicator.
    kernel: Vec<f64>,
    /// Shell measures (the `L^p` weights of profiles).
    w: Vec<f64>,
    /// Sinogram weights `|S^{d−1}| · width_k` of the r-cells.
    omega: Vec<f64>,
    d: usize,
}

impl RadialIteration {
    fn new(layout: RadialProfile) -> Self {
        let d = layout.dim().d();
        let e = layout.edges().to_vec();
        let n = layout.len();
        let area = layout.dim().sphere_area();
        let kernel: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|k| {
                let (lo, hi) = (e[k], e[k + 1]);
                let wid = hi - lo;
                let e = &e;
                (0..n).map(move |i| {
                    let outer = cap_integral(hi, e[i + 1], d) - cap_integral(lo, e[i + 1], d);
                    let inner = cap_integral(hi, e[i], d) - cap_integral(lo, e[i], d);
                    (outer - inner) / wid
                })
            })
            .collect();
        let omega = e.windows(2).map(|x| area * (x[1] - x[0])).collect();
        RadialIteration {
            w: layout.shell_measures(),
            layout,
            kernel,
            omega,
            d,
        }
    }

    fn n(&self) -> usize {
        self.w.len()
    }

    fn forward(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n();
        self.kernel
            .par_chunks(n)
            .map(|row| compensated_sum(row.iter().zip(f).map(|(k, v)| k * v)))
            .collect()
    }

    fn transpose(&self, g: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .into_par_iter()
            .map(|i| compensated_sum((0..n).map(|k| self.kernel[k * n + i] * g[k])))
            .collect()
    }

    fn p(&self) -> f64 {
        (self.d + 1) as f64 / self.d as f64
    }

    fn weighted_norm(v: &[f64], w: &[f64], p: f64) -> f64 {
        compensated_sum(v.iter().zip(w).map(|(a, b)| a.abs().powf(p) * b)).powf(1.0 / p)
    }

    fn normalize(&self, mut f: Vec<f64>) -> (Vec<f64>, f64) {
        let nrm = Self::weighted_norm(&f, &self.w, self.p());
        let lambda = 1.0 / nrm;
        f.iter_mut().for_each(|v| *v *= lambda);
        (f, lambda)
    }
}

impl Iteration for RadialIteration {
    type State = Vec<f64>;

    fn phi(&self, f: &Vec<f64>) -> Result<f64> {
        let q = (self.d + 1) as f64;
        let g = self.forward(f);
        Ok(Self::weighted_norm(&g, &self.omega, q) / Self::weighted_norm(f, &self.w, self.p()))
    }

    fn step(&self, f: &Vec<f64>, _k: usize) -> Result<Step<Vec<f64>>> {
        let d = self.d as i32;
        let g = self.forward(f);
        let wg: Vec<f64> = g.iter().zip(&self.omega).map(|(v, o)| o * v.abs().powi(d)).collect();
        let h = self.transpose(&wg);
        let raw: Vec<f64> = h.iter().zip(&self.w).map(|(v, w)| (v / w).max(0.0).powi(d)).collect();
        let (next, lambda) = self.normalize(raw);
        let diff: Vec<f64> = next.iter().zip(f).map(|(a, b)| a - b).collect();
        let residual = Self::weighted_norm(&diff, &self.w, self.p()) / Self::weighted_norm(f, &self.w, self.p());
        Ok(Step { next, lambda, residual })
    }

    fn field(&self, f: &Vec<f64>) -> Result<Field> {
        Ok(Field::from_radial(self.layout.with_values(f.clone())?))
    }
}

struct ConvIteration {
    cfg: TransformConfig,
    every: Option<usize>,
}

impl Iteration for ConvIteration {
    type State = Field;

    fn phi(&self, f: &Field) -> Result<f64> {
        let p = f.dim().p();
        let q = f.dim().q();
        Ok(lp_norm(&cconv(f, &self.cfg), q)? / lp_norm(f, p)?)
    }

    fn step(&self, f: &Field, k: usize) -> Result<Step<Field>> {
        let d = f.dim().d() as f64;
        let p = f.dim().p();
        let mut next = cconv_adjoint(&cconv(f, &self.cfg).power(d), &self.cfg).power(d);
        if matches!(self.every, Some(m) if m > 0 && k % m == 0) {
            next = psi_inverse(&radial_rearrange(&psi_pullback(&next))?);
        }
        let nrm = lp_norm(&next, p)?;
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::Divergence(format!("iterate norm {nrm} at step {k}")));
        }
        let lambda = 1.0 / nrm;
        let next = next.scaled(lambda);
        let diff = Field::sum(vec![next.clone(), f.scaled(-1.0)])?;
        let diff = sample_grid(&diff, f.as_grid().unwrap().n(), f.as_grid().unwrap().r(), false)?;
        let residual = lp_norm(&diff, p)? / lp_norm(f, p)?;
        Ok(Step { next, lambda, residual })
    }

    fn field(&self, f: &Field) -> Result<Field> {
        Ok(psi_pullback(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn target() -> f64 {
        2f64.powf(-1.0 / 3.0) * PI.powf(2.0 / 3.0)
    }

    fn small() -> SearchConfig {
        SearchConfig {
            method: SearchMethod::Radial {
                cells: 96,
                rho0: 0.05,
                rho_max: 1e3,
            },
            ..SearchConfig::default()
        }
    }

    #[test]
    fn cap_integral_matches_quadrature() {
        use crate::quad::{integrate_interval, QuadSettings};
        for d in [2, 3] {
            for (r, b) in [(0.3f64, 1.0f64), (1.0, 1.0), (2.0, 1.5), (0.0, 2.0)] {
                let want = integrate_interval(
                    |s| super::super::functional::ball_section(b, s, d),
                    0.0,
                    r.min(b),
                    &QuadSettings::default(),
                );
                assert!((cap_integral(r, b, d) - want).abs() < 1e-9, "d={d} r={r} b={b}");
            }
        }
    }

    #[test]
    fn radial_search_is_monotone_and_near_target() {
        let st = search_extremizer(&Field::gaussian(Dimension::TWO, 1.0, 1.0), 200, &small()).unwrap();
        assert!(st.violations.is_empty());
        assert!(st.max_decrease() <= 1e-6);
        assert!((st.phi() / target() - 1.0).abs() < 0.01, "phi = {}", st.phi());
        assert!(st.phi_history[0] < st.phi());
        assert_eq!(st.lambda_history.len(), st.iterations);
    }

    #[test]
    fn parabolic_start_is_pulled_back() {
        let cfg = SearchConfig {
            picture: Picture::Conv,
            ..small()
        };
        let st = search_extremizer(&Field::parabolic_extremizer(Dimension::TWO, 1.0), 3, &cfg).unwrap();
        assert!((st.phi_history[1] - st.phi_history[0]).abs() < 1e-4 * st.phi_history[0]);
    }

    #[test]
    fn non_radial_start_is_rearranged() {
        let f = Field::random_smooth(Dimension::TWO, 3, 4);
        let st = search_extremizer(&f, 1, &small()).unwrap();
        let p = st.field.as_radial().unwrap();
        assert!(p.is_nonincreasing());
        assert!(search_extremizer(&Field::zero(Dimension::TWO), 5, &small()).is_err());
    }

    #[test]
    fn conv_grid_iteration_runs() {
        let cfg = SearchConfig {
            method: SearchMethod::ConvGrid {
                n: 32,
                r: 4.0,
                rearrange_every: Some(2),
            },
            transform: TransformConfig::with_quad(crate::quad::QuadSettings::with_tol(1e-6)),
            ..SearchConfig::default()
        };
        let st = search_extremizer(&Field::gaussian(Dimension::TWO, 1.0, 1.0), 3, &cfg).unwrap();
        assert!(st.iterations >= 1);
        assert!(st.phi().is_finite() && st.phi() > 0.0);
        assert!(st.field.is_grid());
    }
}

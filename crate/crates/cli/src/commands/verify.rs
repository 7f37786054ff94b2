use std::io::Write;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sharp_radon_core::grid::lp_norm_with;
use sharp_radon_core::tolerances::{
    CONJUGACY_POINTWISE, INTERTWINING_POINTWISE, INVERSION_FIXED_POINT, INVERSION_NORM,
};
use sharp_radon_core::transforms::{
    cconv, incidence_limit, incidence_pairing, j_involution, l_swap, psi_pullback, radon_at, radon_norm, rsharp,
    sample_grid,
};
use sharp_radon_core::{lp_norm, AffineMap, Dimension, Field, QuadSettings, TransformConfig};

use crate::config::Settings;
use crate::output::Output;
use crate::{Usage, Verdict};

/// One identity evaluated on one family.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub identity: &'static str,
    pub family: String,
    pub rel_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.rel_error <= self.tolerance
    }
}

type Suite = fn() -> Result<Vec<Check>>;

const SUITES: [(&str, Suite); 8] = [
    ("flat-radon", flat_radon),
    ("flat-norm", flat_norm),
    ("shear-conjugacy", shear_conjugacy),
    ("incidence", incidence),
    ("intertwining", intertwining),
    ("inversion-norm", inversion_norm),
    ("flat-inversion-norm", flat_inversion_norm),
    ("inversion-fixed-point", inversion_fixed_point),
];

/// Names accepted by `--only`, in run order.
pub fn identity_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Relative error normalized by the largest reference value, so points in
/// the far tail do not dominate.
fn worst_scaled(pairs: &[(f64, f64)]) -> f64 {
    let top = pairs
        .iter()
        .map(|p| p.1.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    pairs.iter().map(|(a, b)| (a - b).abs() / top).fold(0.0, f64::max)
}

fn families(dim: Dimension) -> Vec<(String, Field)> {
    vec![
        ("gaussian".into(), Field::gaussian(dim, 1.0, 1.0)),
        ("random_smooth(seed=3,k=5)".into(), Field::random_smooth(dim, 3, 5)),
    ]
}

fn check(identity: &'static str, family: impl Into<String>, rel_error: f64, tolerance: f64) -> Check {
    Check {
        identity,
        family: family.into(),
        rel_error,
        tolerance,
    }
}

/// `⟨x'⟩ ℛ♯f(x) = ℛf(x_d/⟨x'⟩, (−x', 1)/⟨x'⟩)` at random points.
fn flat_radon() -> Result<Vec<Check>> {
    let cfg = TransformConfig::with_quad(QuadSettings::with_tol(1e-10));
    let mut out = Vec::new();
    for dim in [Dimension::TWO, Dimension::THREE] {
        let d = dim.d();
        for (name, f) in families(dim) {
            let flat = rsharp(&f, &cfg);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let mut pairs = Vec::new();
            for _ in 0..20 {
                let mut x = [0.0; 3];
                for c in x.iter_mut().take(d) {
                    *c = rng.gen_range(-2.0..2.0);
                }
                let bracket = (1.0 + (0..d - 1).map(|k| x[k] * x[k]).sum::<f64>()).sqrt();
                let mut theta = [0.0; 3];
                for k in 0..d - 1 {
                    theta[k] = -x[k] / bracket;
                }
                theta[d - 1] = 1.0 / bracket;
                pairs.push((bracket * flat.value(&x), radon_at(&f, x[d - 1] / bracket, &theta, &cfg)));
            }
            out.push(check(
                "flat-radon",
                format!("{name}, d={d}"),
                worst_scaled(&pairs),
                1e-8,
            ));
        }
    }
    Ok(out)
}

/// `‖ℛf‖_{L^q(sinogram)} = ‖ℛ♯f‖_{L^q}` in `d = 2`.
fn flat_norm() -> Result<Vec<Check>> {
    let cfg = TransformConfig::with_quad(QuadSettings::with_tol(1e-8));
    let mut out = Vec::new();
    let dim = Dimension::TWO;
    for (name, f) in families(dim) {
        let a = radon_norm(&f, dim.q(), &cfg)?;
        let b = lp_norm(&rsharp(&f, &cfg), dim.q())?;
        out.push(check("flat-norm", name, rel(a, b), 1e-6));
    }
    Ok(out)
}

/// `𝒞f = Ψ*ℛ♯Ψ*f` at random points.
fn shear_conjugacy() -> Result<Vec<Check>> {
    let cfg = TransformConfig::default();
    let dim = Dimension::TWO;
    let mut out = Vec::new();
    for (name, f) in families(dim) {
        let direct = cconv(&f, &cfg);
        let conj = psi_pullback(&rsharp(&psi_pullback(&f), &cfg));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pairs: Vec<(f64, f64)> = (0..40)
            .map(|_| {
                let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.0];
                (conj.value(&x), direct.value(&x))
            })
            .collect();
        out.push(check(
            "shear-conjugacy",
            name,
            worst_scaled(&pairs),
            CONJUGACY_POINTWISE,
        ));
    }
    Ok(out)
}

/// Extrapolated slab incidence form against its limiting pairing.
fn incidence() -> Result<Vec<Check>> {
    let cfg = TransformConfig::with_quad(QuadSettings::with_tol(1e-5));
    let dim = Dimension::TWO;
    let f = Field::gaussian(dim, 1.0, 1.0);
    let h = Field::gaussian(dim, 0.8, 1.0);
    let lim = incidence_limit(&f, &h, [0.2, 0.1, 0.05], &cfg)?;
    let pair = incidence_pairing(&f, &h, &cfg)?;
    Ok(vec![check(
        "incidence",
        "gaussian x gaussian(a=0.8)",
        rel(lim.extrapolated, pair),
        1e-3,
    )])
}

/// `ℒℛ♯f = ℛ♯𝒥f` cellwise on a grid, for an affine image of the extremizer.
fn intertwining() -> Result<Vec<Check>> {
    let cfg = TransformConfig::default();
    let dim = Dimension::TWO;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let map = AffineMap::random_invertible(dim, &mut rng, 1.5);
    let src = Field::extremizer(dim, 1.0, 1.0).compose_affine(&map)?;
    let f = sample_grid(&src, 64, 4.0, true)?;
    let lhs = l_swap(&rsharp(&f, &cfg));
    let rhs = rsharp(&j_involution(&f), &cfg);
    let (lg, rg) = (lhs.as_grid().expect("grid"), rhs.as_grid().expect("grid"));
    let err = lg
        .values()
        .iter()
        .zip(rg.values())
        .map(|(a, b)| rel(*b, *a))
        .fold(0.0, f64::max);
    Ok(vec![check(
        "intertwining",
        "affine extremizer, 64^2 grid",
        err,
        INTERTWINING_POINTWISE,
    )])
}

/// `‖𝒥f‖_p = ‖f‖_p`.
fn inversion_norm() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for dim in [Dimension::TWO, Dimension::THREE] {
        for (name, f) in families(dim) {
            let p = dim.p();
            let err = rel(lp_norm(&j_involution(&f), p)?, lp_norm(&f, p)?);
            out.push(check(
                "inversion-norm",
                format!("{name}, d={}", dim.d()),
                err,
                INVERSION_NORM,
            ));
        }
    }
    Ok(out)
}

/// `‖ℛ♯𝒥f‖_q = ‖ℛ♯f‖_q` in `d = 2`.
///
/// Fixed rules keep this to seconds; they resolve the inverted field to a few
/// 1e−7 (adaptive rules at 1e−8 reach 2e−8 but take minutes).
fn flat_inversion_norm() -> Result<Vec<Check>> {
    let cfg = TransformConfig::fixed_level(5);
    let dim = Dimension::TWO;
    let q = dim.q();
    let mut out = Vec::new();
    for (name, f) in families(dim) {
        let a = lp_norm_with(&rsharp(&j_involution(&f), &cfg), q, &cfg.quad)?;
        let b = lp_norm_with(&rsharp(&f, &cfg), q, &cfg.quad)?;
        out.push(check("flat-inversion-norm", name, rel(a, b), 1e-5));
    }
    Ok(out)
}

/// `𝒥` fixes the extremizer pointwise.
fn inversion_fixed_point() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in [Dimension::TWO, Dimension::THREE] {
        let e = Field::extremizer(dim, 1.0, 1.0);
        let j = j_involution(&e);
        let mut err: f64 = 0.0;
        for _ in 0..100 {
            let x = [
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
            ];
            err = err.max(rel(j.value(&x), e.value(&x)));
        }
        out.push(check(
            "inversion-fixed-point",
            format!("extremizer, d={}", dim.d()),
            err,
            INVERSION_FIXED_POINT,
        ));
    }
    Ok(out)
}

pub fn run(s: &Settings, out: &Output) -> Result<Verdict> {
    let names = identity_names();
    let selected: Vec<&str> = match s.raw("only") {
        Some(list) => {
            let picked: Vec<&str> = list.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
            for p in &picked {
                if !names.contains(p) {
                    return Err(Usage(format!("unknown identity '{p}'; expected one of {}", names.join(", "))).into());
                }
            }
            names.iter().copied().filter(|n| picked.contains(n)).collect()
        }
        None => {
            s.get("only", "all".to_string())?;
            names.clone()
        }
    };
    let tol_override: Option<f64> = s.opt("tol")?;
    if let Some(t) = tol_override {
        if !(t > 0.0) {
            return Err(Usage("tol must be positive".into()).into());
        }
    }
    let mut checks = Vec::new();
    for (name, suite) in SUITES.iter().filter(|(n, _)| selected.contains(n)) {
        let t0 = std::time::Instant::now();
        let mut part = suite()?;
        out.note(&format!("seconds_{name}"), format!("{:.3}", t0.elapsed().as_secs_f64()));
        if let Some(t) = tol_override {
            for c in &mut part {
                c.tolerance = t;
            }
        }
        checks.extend(part);
    }

    let mut w = out.file("verify.csv")?;
    writeln!(w, "identity,family,rel_error,tolerance,verdict")?;
    println!(
        "{:<22} {:<34} {:>10} {:>10}  verdict",
        "identity", "family", "rel_error", "tolerance"
    );
    for c in &checks {
        let v = if c.passed() { "pass" } else { "fail" };
        writeln!(
            w,
            "{},\"{}\",{:e},{:e},{v}",
            c.identity, c.family, c.rel_error, c.tolerance
        )?;
        println!(
            "{:<22} {:<34} {:>10.2e} {:>10.1e}  {v}",
            c.identity, c.family, c.rel_error, c.tolerance
        );
    }
    w.flush()?;
    let worst = checks
        .iter()
        .filter(|c| !c.passed())
        .max_by(|a, b| (a.rel_error / a.tolerance).total_cmp(&(b.rel_error / b.tolerance)));
    match worst {
        Some(c) => {
            eprintln!(
                "verify failed: worst offender {} on {} ({:.2e} > {:.1e})",
                c.identity, c.family, c.rel_error, c.tolerance
            );
            Ok(Verdict::Failed)
        }
        None => Ok(Verdict::Ok),
    }
}

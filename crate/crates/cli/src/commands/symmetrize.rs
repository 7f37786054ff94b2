use std::io::Write;

use anyhow::Result;
use sharp_radon_core::extremal::{phi_radon, stationarity_probe};
use sharp_radon_core::grid::write_grid_csv;
use sharp_radon_core::symmetrization::{radial_rearrange, steiner_symmetrize};
use sharp_radon_core::tolerances::{REARRANGEMENT_SLACK, STATIONARITY_ALPHA};
use sharp_radon_core::transforms::sample_grid;
use sharp_radon_core::{lp_norm, QuadSettings, TransformConfig};

use super::{dimension, field};
use crate::config::Settings;
use crate::output::Output;
use crate::{Usage, Verdict};

/// Φ on sampled grids: adaptive fibers at 1e−6 with a capped direction count.
fn grid_phi_config() -> TransformConfig {
    TransformConfig {
        min_directions: 64,
        max_directions: 256,
        ..TransformConfig::with_quad(QuadSettings::with_tol(1e-6))
    }
}

pub fn symmetrize(s: &Settings, out: &Output) -> Result<Verdict> {
    let dim = dimension(s)?;
    let d = dim.d();
    let f = field(s, "f", None, dim)?;
    let n = s.get("N", if d == 2 { 64usize } else { 24 })?;
    let r = s.get("R", 6.0)?;
    if n < 2 || n % 2 != 0 || !(r > 0.0) {
        return Err(Usage("N must be even and at least 2, R positive".into()).into());
    }
    let grid = sample_grid(&f, n, r, false)?;
    let sym = match s.get("mode", "radial".to_string())?.as_str() {
        "radial" => radial_rearrange(&grid)?,
        "steiner" => {
            let mut default = vec![0.0; d];
            default[d - 1] = 1.0;
            let dir = s.list("direction", &default)?;
            if dir.len() != d {
                return Err(Usage(format!("direction needs {d} components")).into());
            }
            steiner_symmetrize(&grid, &dir)?
        }
        other => return Err(Usage(format!("unknown mode '{other}'; expected radial or steiner")).into()),
    };
    let mut w = out.file("field.csv")?;
    write_grid_csv(sym.as_grid().expect("rearrangements of grids are grids"), &mut w)?;
    w.flush()?;

    let p = dim.p();
    let (na, nb) = (lp_norm(&grid, p)?, lp_norm(&sym, p)?);
    let cfg = grid_phi_config();
    let (pa, pb) = (phi_radon(&grid, &cfg)?.phi, phi_radon(&sym, &cfg)?.phi);
    let mut rep = out.file("symmetrize.txt")?;
    writeln!(rep, "norm_before = {na:.12e}")?;
    writeln!(rep, "norm_after = {nb:.12e}")?;
    writeln!(rep, "phi_before = {pa:.12e}")?;
    writeln!(rep, "phi_after = {pb:.12e}")?;
    rep.flush()?;
    println!("L^p norm {na:.9e} -> {nb:.9e}, phi {pa:.9} -> {pb:.9}");
    // Steiner resamples off-axis, so the norm is only kept to interpolation accuracy
    let ok = (nb - na).abs() <= 1e-2 * na && pa / pb - 1.0 <= REARRANGEMENT_SLACK;
    Ok(if ok { Verdict::Ok } else { Verdict::Failed })
}

pub fn probe(s: &Settings, out: &Output) -> Result<Verdict> {
    let dim = dimension(s)?;
    let f = field(s, "f", Some("family=extremizer a=1 c=1"), dim)?;
    let g = field(s, "g", Some("family=bump seed=1"), dim)?;
    let eps = s.list("eps", &[-2e-2, -1e-2, 1e-2, 2e-2])?;
    let rep = stationarity_probe(&f, &g, &eps, &TransformConfig::default()).map_err(|e| match e {
        sharp_radon_core::Error::Invalid(m) => anyhow::Error::new(Usage(m)),
        other => other.into(),
    })?;
    let mut w = out.file("probe.csv")?;
    writeln!(w, "eps,phi,delta")?;
    for (e, phi) in rep.eps.iter().zip(&rep.phis) {
        writeln!(w, "{e:e},{phi:.15e},{:e}", phi - rep.phi0)?;
    }
    w.flush()?;
    let mut t = out.file("probe.txt")?;
    writeln!(t, "phi0 = {:.15e}", rep.phi0)?;
    writeln!(t, "alpha = {:e}", rep.alpha)?;
    writeln!(t, "beta = {:e}", rep.beta)?;
    let skipped: Vec<String> = rep.skipped.iter().map(|e| e.to_string()).collect();
    writeln!(t, "skipped = {}", skipped.join(","))?;
    t.flush()?;
    let rel_alpha = rep.alpha.abs() / rep.phi0;
    println!(
        "phi0 {:.9}, alpha/phi0 {rel_alpha:.2e}, beta {:.3e}",
        rep.phi0, rep.beta
    );
    Ok(if rel_alpha <= STATIONARITY_ALPHA {
        Verdict::Ok
    } else {
        Verdict::Failed
    })
}

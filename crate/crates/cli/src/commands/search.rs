use std::io::Write;

use anyhow::Result;
use sharp_radon_core::extremal::{
    fit_affine_profile, search_extremizer, tail_decay_check, Picture, SearchConfig, SearchMethod,
};
use sharp_radon_core::grid::{write_grid_csv, Body};
use sharp_radon_core::tolerances::{sharp_constant_d2, PROFILE_DEVIATION};
use sharp_radon_core::transforms::sample_grid;

use super::{dimension, field, write_columns};
use crate::config::Settings;
use crate::output::Output;
use crate::{Usage, Verdict};

fn method(s: &Settings, d: usize) -> Result<SearchMethod, Usage> {
    match s.get("method", "radial".to_string())?.as_str() {
        "radial" => {
            let cells = s.get("N", 256usize)?;
            let rho0 = s.get("rho0", 0.05)?;
            let rho_max = s.get("rho_max", 1e4)?;
            if cells < 8 || !(rho0 > 0.0) || !(rho_max > rho0) {
                return Err(Usage("radial search needs N >= 8 and 0 < rho0 < rho_max".into()));
            }
            Ok(SearchMethod::Radial { cells, rho0, rho_max })
        }
        "conv-grid" => {
            let n = s.get("N", if d == 2 { 128usize } else { 32 })?;
            let r = s.get("R", 8.0)?;
            let every = s.get("rearrange_every", 0usize)?;
            if n < 4 || n % 2 != 0 || !(r > 0.0) {
                return Err(Usage("conv-grid search needs even N >= 4 and R > 0".into()));
            }
            Ok(SearchMethod::ConvGrid {
                n,
                r,
                rearrange_every: (every > 0).then_some(every),
            })
        }
        other => Err(Usage(format!("unknown method '{other}'; expected radial or conv-grid"))),
    }
}

pub fn run(s: &Settings, out: &Output) -> Result<Verdict> {
    let dim = dimension(s)?;
    let d = dim.d();
    let start = field(s, "start", Some("family=gaussian a=1 c=1"), dim)?;
    let picture = match s.get("picture", "radon".to_string())?.as_str() {
        "radon" => Picture::Radon,
        "conv" => Picture::Conv,
        other => return Err(Usage(format!("unknown picture '{other}'; expected radon or conv")).into()),
    };
    let defaults = SearchConfig::default();
    let cfg = SearchConfig {
        method: method(s, d)?,
        tol: s.get("tol", defaults.tol)?,
        monotone_tol: s.get("monotone_tol", defaults.monotone_tol)?,
        picture,
        ..defaults
    };
    let iters = s.get("iters", 200usize)?;
    let st = search_extremizer(&start, iters, &cfg)?;

    let mut w = out.file("search.csv")?;
    writeln!(w, "iter,phi,residual,lambda")?;
    for k in 0..=st.iterations {
        let phi = st.phi_history.get(k).copied().unwrap_or(f64::NAN);
        let (res, lam) = if k == 0 {
            (f64::NAN, f64::NAN)
        } else {
            (
                st.residual_history.get(k - 1).copied().unwrap_or(f64::NAN),
                st.lambda_history.get(k - 1).copied().unwrap_or(f64::NAN),
            )
        };
        writeln!(w, "{k},{phi:.15e},{res:e},{lam:e}")?;
    }
    w.flush()?;
    let times: Vec<String> = st
        .step_times
        .iter()
        .map(|t| format!("{:.4}", t.as_secs_f64()))
        .collect();
    out.note("step_seconds", times.join(","));

    let rows: Vec<(f64, f64)> = match st.field.body() {
        Body::Radial(p) => p.nodes().iter().copied().zip(p.values().iter().copied()).collect(),
        _ => (0..400)
            .map(|i| {
                let r = 1e-2 * 1e5f64.powf(i as f64 / 399.0);
                (r, st.field.value(&[r, 0.0, 0.0]))
            })
            .collect(),
    };
    write_columns(out, "profile.dat", "rho f(rho)", &rows)?;
    let dump_n = s.get("dump_N", if d == 2 { 64usize } else { 24 })?;
    let dump_r = s.get("dump_R", 8.0)?;
    let dump = sample_grid(&st.field, dump_n, dump_r, false)?;
    let mut w = out.file("field.csv")?;
    write_grid_csv(dump.as_grid().expect("sampled"), &mut w)?;
    w.flush()?;

    let fit = fit_affine_profile(&st.field)?;
    let tail = tail_decay_check(&st.field)?;
    let mut r = out.file("report.txt")?;
    writeln!(r, "method = {}", st.method)?;
    writeln!(r, "iterations = {}", st.iterations)?;
    writeln!(r, "converged = {}", st.converged)?;
    writeln!(r, "phi = {:.12e}", st.phi())?;
    if d == 2 {
        let target = sharp_constant_d2();
        writeln!(r, "phi_target = {target:.12e}")?;
        writeln!(r, "phi_rel_gap = {:.3e}", (st.phi() - target).abs() / target)?;
    }
    writeln!(r, "max_decrease = {:e}", st.max_decrease())?;
    let viol: Vec<String> = st.violations.iter().map(|v| v.to_string()).collect();
    writeln!(r, "violations = {}", viol.join(","))?;
    writeln!(r, "fit_c = {:.9e}", fit.c)?;
    writeln!(r, "fit_a = {:.9e}", fit.a)?;
    writeln!(r, "fit_max_deviation = {:.3e}", fit.max_deviation)?;
    writeln!(r, "fit_worst_radius = {:.4e}", fit.worst_radius)?;
    writeln!(r, "tail_stable = {}", tail.stable)?;
    writeln!(r, "tail_insufficient = {}", tail.insufficient)?;
    let ratios: Vec<String> = tail.last_ratios.iter().map(|x| format!("{x:.6}")).collect();
    writeln!(r, "tail_last_ratios = {}", ratios.join(","))?;
    if let Some(m) = tail.limit() {
        writeln!(r, "tail_limit = {m:.9e}")?;
    }
    r.flush()?;

    println!(
        "{}: {} iterations, phi = {:.9}, fit deviation {:.2e}, tail {}",
        st.method,
        st.iterations,
        st.phi(),
        fit.max_deviation,
        if tail.stable { "stable" } else { "unstable" }
    );
    let ok = st.violations.is_empty() && fit.max_deviation <= PROFILE_DEVIATION;
    Ok(if ok { Verdict::Ok } else { Verdict::Failed })
}

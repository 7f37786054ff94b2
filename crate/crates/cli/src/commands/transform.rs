use std::io::Write;

use anyhow::Result;
use sharp_radon_core::grid::write_grid_csv;
use sharp_radon_core::transforms::{
    cconv, cconv_adjoint, j_involution, l_swap, psi_inverse, psi_pullback, radon, rsharp, rsharp_adjoint, sample_grid,
    sinogram_norm,
};
use sharp_radon_core::{Field, SinogramLayout, TransformConfig};

use super::{dimension, field, write_columns};
use crate::config::Settings;
use crate::output::Output;
use crate::{Usage, Verdict};

const OPS: &str = "radon, rsharp, rsharp_adjoint, cconv, cconv_adjoint, psi, psi_inverse, swap, j";

pub fn run(s: &Settings, out: &Output) -> Result<Verdict> {
    let dim = dimension(s)?;
    let d = dim.d();
    let op = s.get("op", "radon".to_string())?;
    let f = field(s, "f", None, dim)?;
    let n = s.get("N", if d == 2 { 64 } else { 24 })?;
    let r = s.get("R", 4.0)?;
    if n < 2 || n % 2 != 0 || !(r > 0.0) {
        return Err(Usage("N must be even and at least 2, R positive".into()).into());
    }
    let tol = s.get("quad_tol", 1e-8)?;
    let cfg = TransformConfig::with_quad(sharp_radon_core::QuadSettings::with_tol(tol));

    if op == "radon" {
        let nr = s.get("nr", n)?;
        let ndirs = s.get("ndirs", if d == 2 { 64 } else { 128 })?;
        let layout = SinogramLayout::uniform(dim, nr, r, ndirs).map_err(|e| Usage(e.to_string()))?;
        let sino = radon(&f, &layout, &cfg)?;
        let mut w = out.file("sinogram.csv")?;
        sino.write_csv(&mut w)?;
        w.flush()?;
        let rows: Vec<(f64, f64)> = (0..layout.nr()).map(|i| (layout.r(i), sino.value(i, 0))).collect();
        let th = layout.directions().points()[0];
        write_columns(
            out,
            "profile.dat",
            &format!("r radon(r, theta) at theta = {:?}", &th[..d]),
            &rows,
        )?;
        let q = dim.q();
        println!("sinogram norm (q = {q}): {:.10e}", sinogram_norm(&sino, q)?);
        return Ok(Verdict::Ok);
    }

    let g: Field = match op.as_str() {
        "rsharp" => rsharp(&f, &cfg),
        "rsharp_adjoint" => rsharp_adjoint(&f, &cfg),
        "cconv" => cconv(&f, &cfg),
        "cconv_adjoint" => cconv_adjoint(&f, &cfg),
        "psi" => psi_pullback(&f),
        "psi_inverse" => psi_inverse(&f),
        "swap" => l_swap(&f),
        "j" => j_involution(&f),
        other => return Err(Usage(format!("unknown op '{other}'; expected one of {OPS}")).into()),
    };
    let grid = sample_grid(&g, n, r, false)?;
    let mut w = out.file("field.csv")?;
    write_grid_csv(grid.as_grid().expect("sampled"), &mut w)?;
    w.flush()?;
    let h = 2.0 * r / n as f64;
    let rows: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = -r + (i as f64 + 0.5) * h;
            (t, g.value(&[t, 0.0, 0.0]))
        })
        .collect();
    write_columns(out, "profile.dat", &format!("x1 {op}(f)(x1, 0)"), &rows)?;
    println!("{op}: wrote {n}^{d} grid on [-{r}, {r}]^{d}");
    Ok(Verdict::Ok)
}

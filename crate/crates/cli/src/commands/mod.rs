mod multilinear;
mod search;
mod symmetrize;
mod transform;
mod verify;

use anyhow::Result;
use sharp_radon_core::{parse_field_spec, Dimension, Field};

use crate::config::Settings;
use crate::output::Output;
use crate::{Command, Usage, Verdict};

pub use verify::{identity_names, Check};

pub fn dispatch(cmd: &Command, s: &Settings, out: &Output) -> Result<Verdict> {
    match cmd {
        Command::Transform(_) => transform::run(s, out),
        Command::Verify(_) => verify::run(s, out),
        Command::Search(_) => search::run(s, out),
        Command::Drury(_) => multilinear::drury(s, out),
        Command::Burchard(_) => multilinear::burchard(s, out),
        Command::Symmetrize(_) => symmetrize::symmetrize(s, out),
        Command::Probe(_) => symmetrize::probe(s, out),
    }
}

fn dimension(s: &Settings) -> Result<Dimension, Usage> {
    let d = s.get("d", 2usize)?;
    Dimension::new(d).map_err(|e| Usage(e.to_string()))
}

/// Closed-form field parsed from the field spec under `key` (required when `default` is `None`).
fn field(s: &Settings, key: &str, default: Option<&str>, dim: Dimension) -> Result<Field, Usage> {
    let text = match default {
        Some(d) => s.get(key, d.to_string())?,
        None => s.require(key)?,
    };
    let spec = parse_field_spec(&text).map_err(|e| Usage(format!("--{key}: {e}")))?;
    spec.build(dim).map_err(|e| Usage(format!("--{key}: {e}")))
}

/// Two-column plot file with a comment header.
fn write_columns(out: &Output, name: &str, header: &str, rows: &[(f64, f64)]) -> Result<()> {
    use std::io::Write;
    let mut w = out.file(name)?;
    writeln!(w, "# {header}")?;
    for (a, b) in rows {
        writeln!(w, "{a:e} {b:e}")?;
    }
    w.flush()?;
    Ok(())
}

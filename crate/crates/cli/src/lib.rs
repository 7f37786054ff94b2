//! `sharp-radon`: batch experiments over the core library. Every command
//! reads `key = value` settings (config file, then flags), writes its
//! outputs under `--out`, and echoes the resolved settings and a separate
//! timing file next to them.
//!
//! Exit codes: 0 success, 1 failed check or computation error, 2 usage error.

// `!(x > 0.0)` deliberately rejects NaN; index loops mirror the formulas
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;

use config::Settings;

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "SHARP_RADON_THREADS";

/// Bad flags, settings or field specs (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Result of a command that completed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// The command ran but a check it performs failed (exit code 1).
    Failed,
}

#[derive(Parser, Debug)]
#[command(name = "sharp-radon", version, about = "Radon transform extremizer experiments")]
pub struct Cli {
    /// `key = value` settings file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to $SHARP_RADON_THREADS, then all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Dimension, 2 or 3.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// ℛ, ℛ♯, 𝒞 (and friends) of a field, written as CSV plus a profile.
    Transform(TransformArgs),
    /// Identity suite over the built-in families.
    Verify(VerifyArgs),
    /// Fixed-point extremizer search with profile fit and tail check.
    Search(SearchArgs),
    /// Monte Carlo estimate of the multilinear form against quadrature.
    Drury(DruryArgs),
    /// Equality verdicts of T_v on a grid of interval centers.
    Burchard(BurchardArgs),
    /// Radial or Steiner rearrangement of a sampled field.
    Symmetrize(SymmetrizeArgs),
    /// Second-order stationarity probe Φ(f + εg).
    Probe(ProbeArgs),
}

#[derive(Args, Debug, Default)]
pub struct TransformArgs {
    /// radon, rsharp, rsharp_adjoint, cconv, cconv_adjoint, psi, psi_inverse, swap, j
    #[arg(long)]
    pub op: Option<String>,
    /// Field spec, e.g. "family=extremizer a=1 c=1".
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "R")]
    pub r: Option<f64>,
    /// Radial samples of the sinogram.
    #[arg(long)]
    pub nr: Option<usize>,
    /// Directions of the sinogram.
    #[arg(long)]
    pub ndirs: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    /// Comma-separated identity names.
    #[arg(long)]
    pub only: Option<String>,
    /// Replace every tolerance by this value.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct SearchArgs {
    /// Start field spec.
    #[arg(long)]
    pub start: Option<String>,
    /// radial or conv-grid.
    #[arg(long)]
    pub method: Option<String>,
    /// Radial cells, or grid cells per axis for conv-grid.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Half-width of the conv-grid box.
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// radon or conv: which functional the start is meant for.
    #[arg(long)]
    pub picture: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct DruryArgs {
    #[arg(long)]
    pub f: Option<String>,
    /// Sample count; `1e6` is accepted.
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Default)]
pub struct BurchardArgs {
    #[arg(long)]
    pub m: Option<usize>,
    /// Coefficients v_1..v_m, comma-separated (decimals or p/q).
    #[arg(long)]
    pub v: Option<String>,
    /// Interval lengths r_0..r_m, comma-separated.
    #[arg(long)]
    pub lengths: Option<String>,
    /// Centers per axis of the (c_0, c_1) grid.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct SymmetrizeArgs {
    #[arg(long)]
    pub f: Option<String>,
    /// radial or steiner.
    #[arg(long)]
    pub mode: Option<String>,
    /// Steiner direction, comma-separated.
    #[arg(long)]
    pub direction: Option<String>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "R")]
    pub r: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct ProbeArgs {
    #[arg(long)]
    pub f: Option<String>,
    /// Perturbation field spec.
    #[arg(long)]
    pub g: Option<String>,
    /// Step sizes, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<String>,
}

fn put<T: ToString>(s: &mut Settings, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        s.set(key, v.to_string());
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Transform(_) => "transform",
            Command::Verify(_) => "verify",
            Command::Search(_) => "search",
            Command::Drury(_) => "drury",
            Command::Burchard(_) => "burchard",
            Command::Symmetrize(_) => "symmetrize",
            Command::Probe(_) => "probe",
        }
    }

    /// Writes the explicitly given flags over the file settings.
    fn overlay(&self, s: &mut Settings) {
        match self {
            Command::Transform(a) => {
                put(s, "op", &a.op);
                put(s, "f", &a.f);
                put(s, "N", &a.n);
                put(s, "R", &a.r);
                put(s, "nr", &a.nr);
                put(s, "ndirs", &a.ndirs);
            }
            Command::Verify(a) => {
                put(s, "only", &a.only);
                put(s, "tol", &a.tol);
            }
            Command::Search(a) => {
                put(s, "start", &a.start);
                put(s, "method", &a.method);
                put(s, "N", &a.n);
                put(s, "R", &a.r);
                put(s, "iters", &a.iters);
                put(s, "tol", &a.tol);
                put(s, "picture", &a.picture);
            }
            Command::Drury(a) => {
                put(s, "f", &a.f);
                put(s, "samples", &a.samples);
                put(s, "seed", &a.seed);
            }
            Command::Burchard(a) => {
                put(s, "m", &a.m);
                put(s, "v", &a.v);
                put(s, "lengths", &a.lengths);
                put(s, "grid", &a.grid);
            }
            Command::Symmetrize(a) => {
                put(s, "f", &a.f);
                put(s, "mode", &a.mode);
                put(s, "direction", &a.direction);
                put(s, "N", &a.n);
                put(s, "R", &a.r);
            }
            Command::Probe(a) => {
                put(s, "f", &a.f);
                put(s, "g", &a.g);
                put(s, "eps", &a.eps);
            }
        }
    }
}

/// Settings for `cli`: config file first, then global and command flags.
pub fn settings_for(cli: &Cli) -> Result<Settings, Usage> {
    let mut s = match &cli.config {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    put(&mut s, "out", &cli.out.as_ref().map(|p| p.display().to_string()));
    put(&mut s, "threads", &cli.threads);
    put(&mut s, "d", &cli.d);
    cli.command.overlay(&mut s);
    Ok(s)
}

fn configure_threads(s: &Settings) -> Result<usize, Usage> {
    let env = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok());
    let n = match s.opt::<usize>("threads")?.or(env) {
        Some(0) => return Err(Usage("threads must be positive".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    // a second call in the same process (tests) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(rayon::current_num_threads())
}

/// Parses `args` and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.downcast_ref::<Usage>().is_some() { 2 } else { 1 })
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<Verdict> {
    let settings = settings_for(cli)?;
    let threads = configure_threads(&settings)?;
    let out = output::Output::create(&settings, cli.command.name(), threads)?;
    let verdict = commands::dispatch(&cli.command, &settings, &out)?;
    let unused = settings.unused();
    if !unused.is_empty() {
        log::warn!("settings not used by {}: {}", cli.command.name(), unused.join(", "));
    }
    out.finish(&settings, verdict)?;
    Ok(verdict)
}

use std::cell::RefCell;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};

use crate::config::Settings;
use crate::{Usage, Verdict};

/// Output directory of one command run. Deterministic files go through
/// [`Output::file`]; the clock only ever reaches `<command>.meta`.
pub struct Output {
    dir: PathBuf,
    command: &'static str,
    threads: usize,
    started: SystemTime,
    clock: Instant,
    files: RefCell<Vec<String>>,
    notes: RefCell<Vec<(String, String)>>,
}

impl Output {
    pub fn create(s: &Settings, command: &'static str, threads: usize) -> Result<Self> {
        let dir = PathBuf::from(s.get("out", "out".to_string())?);
        if dir.as_os_str().is_empty() {
            return Err(Usage("output directory must be nonempty".into()).into());
        }
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output {
            dir,
            command,
            threads,
            started: SystemTime::now(),
            clock: Instant::now(),
            files: RefCell::default(),
            notes: RefCell::default(),
        })
    }

    /// Timing or other run-dependent values for the metadata file.
    pub fn note(&self, key: &str, value: impl std::fmt::Display) {
        self.notes.borrow_mut().push((key.to_string(), value.to_string()));
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn file(&self, name: &str) -> Result<BufWriter<File>> {
        let p = self.path(name);
        let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
        self.files.borrow_mut().push(name.to_string());
        Ok(BufWriter::new(f))
    }

    /// Writes `<command>.config` (resolved settings) and `<command>.meta`
    /// (timestamps, runtime, thread count, outcome).
    pub fn finish(&self, s: &Settings, verdict: Verdict) -> Result<()> {
        let mut cfg = self.file(&format!("{}.config", self.command))?;
        writeln!(cfg, "command = {}", self.command)?;
        cfg.write_all(s.resolved_text().as_bytes())?;
        cfg.flush()?;
        let mut meta = BufWriter::new(File::create(self.path(&format!("{}.meta", self.command)))?);
        let since = self.started.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
        writeln!(meta, "started_unix = {since:.3}")?;
        writeln!(meta, "runtime_seconds = {:.3}", self.clock.elapsed().as_secs_f64())?;
        writeln!(meta, "threads = {}", self.threads)?;
        writeln!(meta, "version = {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(
            meta,
            "verdict = {}",
            if verdict == Verdict::Ok { "ok" } else { "failed" }
        )?;
        writeln!(meta, "files = {}", self.files.borrow().join(","))?;
        for (k, v) in self.notes.borrow().iter() {
            writeln!(meta, "{k} = {v}")?;
        }
        meta.flush()?;
        Ok(())
    }
}

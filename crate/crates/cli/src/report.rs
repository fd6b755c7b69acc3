//! JSON report envelope and output routing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Every JSON report carries the tool version, the full configuration and the
/// seed; only `timestamp` differs between replays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<C, R> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub config: C,
    pub result: R,
}

impl<C, R> Report<C, R> {
    pub fn new(command: &str, seed: Option<u64>, config: C, result: R) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            config,
            result,
        }
    }
}

/// Where results and human summaries go. With an output path, results are
/// written there and summaries to standard output; without one, results go
/// to standard output and summaries to standard error.
pub struct Sink {
    pub out: Option<PathBuf>,
}

impl Sink {
    pub fn summary(&self, line: impl AsRef<str>) {
        if self.out.is_some() {
            println!("{}", line.as_ref());
        } else {
            eprintln!("{}", line.as_ref());
        }
    }

    /// Stream bulk text through `write`.
    pub fn text(&self, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        match &self.out {
            Some(p) => write_to(p, write),
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                write(&mut lock)?;
                lock.flush()?;
                Ok(())
            }
        }
    }

    pub fn report<C: Serialize, R: Serialize>(&self, report: &Report<C, R>) -> Result<()> {
        self.text(|w| {
            serde_json::to_writer_pretty(&mut *w, report)?;
            writeln!(w)
        })
    }
}

pub fn write_to(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write(&mut w).with_context(|| format!("cannot write {}", path.display()))?;
    w.flush()?;
    Ok(())
}

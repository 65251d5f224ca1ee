use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use ness_core::linalg::C64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Complex number as an explicit {re, im} object.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

/// Where a command writes: `--out`, else `$NESS_OUTPUT_DIR/<command>.<ext>`,
/// else stdout.
pub struct Destination {
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Destination {
    pub fn resolve(out: Option<&Path>, dir: Option<&Path>, command: &str, format: Format) -> Self {
        let path = out.map(Path::to_path_buf).or_else(|| dir.map(|d| d.join(format!("{command}.{}", format.ext()))));
        Destination { path, format }
    }

    pub fn open(&self) -> Result<Box<dyn Write>> {
        match &self.path {
            Some(p) => {
                if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
                }
                let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
                Ok(Box::new(BufWriter::new(f)))
            }
            None => Ok(Box::new(io::stdout().lock())),
        }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut w = self.open()?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// CSV with optional leading `# key=value` comment lines.
    pub fn csv<T: Serialize>(&self, comments: &[(&str, String)], rows: &[T]) -> Result<()> {
        let mut w = self.open()?;
        for (k, v) in comments {
            writeln!(w, "# {k}={v}")?;
        }
        let mut cw = csv::Writer::from_writer(w);
        for r in rows {
            cw.serialize(r)?;
        }
        cw.flush()?;
        Ok(())
    }
}

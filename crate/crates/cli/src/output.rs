//! Report emission: CSV data files with a resolved-configuration header and
//! a JSON run summary.
//!
//! CSV bytes depend only on the resolved configuration and the data, so a
//! rerun with the same inputs is byte-identical; volatile fields (wall time)
//! go to the JSON summary only.

use anyhow::{Context, Result};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Resolved key=value pairs echoed into every report.
#[derive(Debug, Clone, Default)]
pub struct ResolvedConfig(BTreeMap<String, String>);

impl ResolvedConfig {
    pub fn new(command: &str) -> Self {
        let mut map = BTreeMap::new();
        map.insert("command".to_string(), command.to_string());
        Self(map)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn header_lines(&self) -> impl Iterator<Item = String> + '_ {
        self.0.iter().map(|(k, v)| format!("# {k}={v}"))
    }

    pub fn as_json(&self) -> Value {
        json!(self.0)
    }
}

/// Where the CSV and JSON for one run go.
pub struct OutputPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
}

impl OutputPaths {
    /// `<out_dir>/<basename>.csv` and `.json`; out_dir falls back to the
    /// ARCSPIN_OUT_DIR environment variable, then the working directory.
    pub fn resolve(out_dir: Option<&Path>, basename: &str) -> Self {
        let dir = out_dir
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os("ARCSPIN_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        Self {
            csv: dir.join(format!("{basename}.csv")),
            json: dir.join(format!("{basename}.json")),
        }
    }

    /// Fail before computing anything if the target directory cannot take
    /// the files.
    pub fn check_writable(&self) -> Result<()> {
        for path in [&self.csv, &self.json] {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() && !parent.is_dir() {
                    anyhow::bail!("output directory {} does not exist", parent.display());
                }
            }
        }
        Ok(())
    }
}

pub struct Report {
    pub config: ResolvedConfig,
    pub csv_header: String,
    pub csv_rows: Vec<String>,
    pub summary_extra: Value,
    pub failures: Vec<String>,
}

impl Report {
    pub fn write(&self, paths: &OutputPaths, started: Instant) -> Result<()> {
        let mut csv = String::new();
        for line in self.config.header_lines() {
            csv.push_str(&line);
            csv.push('\n');
        }
        csv.push_str(&self.csv_header);
        csv.push('\n');
        for row in &self.csv_rows {
            csv.push_str(row);
            csv.push('\n');
        }
        std::fs::write(&paths.csv, csv)
            .with_context(|| format!("writing {}", paths.csv.display()))?;

        let summary = json!({
            "config": self.config.as_json(),
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": started.elapsed().as_secs_f64(),
            "rows": self.csv_rows.len(),
            "failures": self.failures,
            "outputs": { "csv": paths.csv.display().to_string() },
            "summary": self.summary_extra,
        });
        std::fs::write(&paths.json, format!("{:#}\n", summary))
            .with_context(|| format!("writing {}", paths.json.display()))?;
        Ok(())
    }
}

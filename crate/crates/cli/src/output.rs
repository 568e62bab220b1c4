//! CSV and JSON emission. Every file starts with the schema version and the
//! full effective configuration; every CSV row carries the seed and a hash
//! of that configuration.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Effective configuration of one run.
pub struct RunInfo {
    pub command: &'static str,
    pub config: BTreeMap<String, String>,
}

impl RunInfo {
    fn echo(&self) -> String {
        self.config
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// FNV-1a of the command and configuration echo.
    pub fn hash(&self) -> String {
        format!("{:016x}", perclat_core::stats::namespace(&format!("{} {}", self.command, self.echo())))
    }
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::File::create(path)?)
}

/// Writes `rows` under `header`, prefixed by `#` comment lines.
pub fn write_csv(path: &Path, info: &RunInfo, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
    let mut buf: Vec<u8> = Vec::new();
    writeln!(buf, "# perclat {} schema={SCHEMA_VERSION}", info.command)?;
    writeln!(buf, "# config: {}", info.echo())?;
    writeln!(buf, "# config_hash={}", info.hash())?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush()?;
    }
    create(path)?.write_all(&buf)?;
    Ok(path.to_path_buf())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, info: &RunInfo, result: &T) -> Result<PathBuf, CliError> {
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "command": info.command,
        "config": info.config,
        "config_hash": info.hash(),
        "result": result,
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    text.push('\n');
    create(path)?.write_all(text.as_bytes())?;
    Ok(path.to_path_buf())
}

/// Formats a float with the shortest representation that round-trips.
pub fn f(x: f64) -> String {
    format!("{x}")
}

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use idealab::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Table,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Table {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> =
                cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}", w = *w)).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.headers);
        out += &(line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>()));
        for row in &self.rows {
            out += &line(row);
        }
        out
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::io(e.to_string());
        w.write_record(&self.headers).map_err(err)?;
        for row in &self.rows {
            w.write_record(row).map_err(err)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| CliError::io(e.to_string()))?)
            .map_err(|e| CliError::io(e.to_string()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub created_unix: u64,
}

/// The saved artifact of one run. Everything except `header` is a
/// function of the configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub header: Header,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub status: String,
    pub result: Value,
    pub table: Table,
}

impl Report {
    pub fn new(command: &str, config: Value, status: &str, result: Value, table: Table) -> Report {
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Report {
            header: Header { tool: format!("idealab {}", env!("CARGO_PKG_VERSION")), created_unix },
            version: SCHEMA_VERSION.into(),
            command: command.into(),
            config,
            status: status.into(),
            result,
            table,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        Ok(match format {
            Format::Json => self.to_json(),
            Format::Csv => self.table.to_csv()?,
            Format::Table => format!("{} [{}]\n{}", self.command, self.status, self.table.render()),
        })
    }
}

/// Writes `text` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::io(format!("{}: {e}", path.display()));
    let tmp = path.with_extension(format!(
        "{}tmp",
        path.extension().map(|e| format!("{}.", e.to_string_lossy())).unwrap_or_default()
    ));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

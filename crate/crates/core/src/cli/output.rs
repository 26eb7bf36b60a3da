//! JSON documents and flat CSV tables. Both carry the resolved config.

use super::config::{Format, RunConfig};
use crate::error::{EcsError, Result};
use serde::Serialize;
use std::io::Write;

pub const SCHEMA_VERSION: &str = "ecs-output/1";

#[derive(Debug, Serialize)]
pub struct Document<'a, T: Serialize> {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub data: T,
}

/// One CSV table: header plus rows of already formatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: Vec<S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// 17 significant digits, locale-free.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn vector(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_json<T: Serialize>(doc: &Document<'_, T>) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| EcsError::Config(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn render_csv(command: &str, config: &RunConfig, table: &Table) -> Result<String> {
    let cfg = serde_json::to_string(config).map_err(|e| EcsError::Config(format!("serialization: {e}")))?;
    let mut s = format!("# schema_version={SCHEMA_VERSION}\n# command={command}\n# config={cfg}\n");
    s.push_str(&table.header.join(","));
    s.push('\n');
    for row in &table.rows {
        s.push_str(&row.iter().map(|c| cell(c)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    Ok(s)
}

pub fn emit<T: Serialize>(command: &'static str, config: &RunConfig, data: T, table: impl FnOnce(&T) -> Table) -> Result<()> {
    let text = match config.format {
        Format::Json => render_json(&Document { schema_version: SCHEMA_VERSION, command, config, data })?,
        Format::Csv => render_csv(command, config, &table(&data))?,
    };
    match &config.out {
        Some(path) => std::fs::write(path, text).map_err(|e| EcsError::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| EcsError::Config(format!("cannot write to stdout: {e}"))),
    }
}

//! Output tables in CSV or JSON.
//!
//! Numbers are written in Rust's shortest round-trip form (`0.3`, `1e-7`).
//! Non-finite values appear as `inf`, `-inf` and `NaN` in CSV and as the
//! same strings in JSON; missing values are empty in CSV and `null` in JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:?}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => Value::String(format!("{x:?}")),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::io("writing CSV", std::io::Error::other(e));
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(fail)?;
        }
        w.into_inner()
            .map_err(|e| CliError::io("writing CSV", std::io::Error::other(e.to_string())))
    }

    /// `{"command", "parameters", "columns", "rows": [{column: value}]}`.
    pub fn to_json(&self, command: &str, parameters: &Map<String, Value>) -> Vec<u8> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::json))
                        .collect(),
                )
            })
            .collect();
        let doc = json!({
            "schema_version": crate::SCHEMA_VERSION,
            "command": command,
            "parameters": parameters,
            "columns": self.columns,
            "rows": rows,
        });
        let mut out = serde_json::to_vec_pretty(&doc).expect("JSON values serialise");
        out.push(b'\n');
        out
    }

    pub fn render(&self, format: Format, command: &str, parameters: &Map<String, Value>) -> CliResult<Vec<u8>> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json(command, parameters)),
        }
    }
}

/// Where relative output paths land: `RSKCAP_OUT_DIR` if set, otherwise the
/// working directory.
pub fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(crate::OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Write to `path` (creating parent directories), or to stdout when absent.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => {
            let p = resolve_output(p);
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| CliError::io(format!("creating {}", parent.display()), e))?;
            }
            fs::write(&p, bytes).map_err(|e| CliError::io(format!("writing {}", p.display()), e))
        }
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("writing to stdout", e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["scheme", "x", "n", "raw", "ok"]);
        t.push(vec!["csk".into(), 0.1.into(), 7u64.into(), f64::NEG_INFINITY.into(), true.into()]);
        t.push(vec!["rsk-opt".into(), Cell::Empty, 8u64.into(), 1e-7.into(), false.into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let s = String::from_utf8(sample().to_csv().unwrap()).unwrap();
        assert_eq!(s, "scheme,x,n,raw,ok\ncsk,0.1,7,-inf,true\nrsk-opt,,8,1e-7,false\n");
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_slice(&sample().to_json("capacity", &Map::new())).unwrap();
        assert_eq!(v["rows"][0]["raw"], "-inf");
        assert_eq!(v["rows"][1]["x"], Value::Null);
        assert_eq!(v["rows"][1]["raw"], 1e-7);
        assert_eq!(v["columns"][4], "ok");
    }

    #[test]
    fn formats() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }
}

//! Tables rendered as CSV or JSON and written atomically.

use crate::config::Format;
use crate::error::CliError;
use serde_json::{Map, Value};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    /// Exact decimal integer too large for a float.
    Big(String),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => fmt_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Big(s) | Cell::Text(s) => s.clone(),
        }
    }

    pub fn json(&self) -> Value {
        match self {
            Cell::Float(x) if *x == 0.0 => Value::from(0.0),
            Cell::Float(x) if x.is_finite() => Value::from(*x),
            Cell::Float(x) => Value::String(fmt_float(*x)),
            Cell::Int(i) => Value::from(*i),
            Cell::Big(s) | Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Shortest representation that parses back to the same value.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 || (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A grid of results with metadata. `meta` becomes `#` comment lines in
/// CSV and a top-level object in JSON; `summary` goes after the rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            ..Self::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: Cell) {
        self.meta.push((key.to_string(), value));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => {
                let mut text = serde_json::to_string_pretty(&self.json()).expect("plain values");
                text.push('\n');
                text
            }
        }
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {}\n", v.csv()));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# summary {k}: {}\n", v.csv()));
        }
        out
    }

    fn json(&self) -> Value {
        let mut root = Map::new();
        for (k, v) in &self.meta {
            root.insert(k.clone(), v.json());
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        root.insert("rows".into(), Value::Array(rows));
        if !self.summary.is_empty() {
            let obj: Map<String, Value> = self
                .summary
                .iter()
                .map(|(k, v)| (k.clone(), v.json()))
                .collect();
            root.insert("summary".into(), Value::Object(obj));
        }
        Value::Object(root)
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

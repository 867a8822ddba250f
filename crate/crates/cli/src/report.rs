//! Tables, bundles and their CSV / JSON serialization.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

/// Rounds to 10 significant digits and prints the shortest decimal form.
pub fn format_real(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("scientific literal");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    rounded.to_string()
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Real(x) => format_real(*x).parse::<f64>().map_or(Value::Null, |v| json!(v)),
            Cell::Empty => Value::Null,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            Cell::Empty => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    /// `None` for bare matrices.
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: Some(header.iter().map(|h| h.to_string()).collect()),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.header.as_ref()?.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_f64()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(h) = &self.header {
            out.push_str(&h.join(","));
            out.push('\n');
        }
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Inverse of [`Table::to_csv`] for tables with a header.
    pub fn from_csv(name: &str, text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| CliError::Parse(format!("{name}: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| CliError::Parse(format!("{name}: {e}")))?;
            let row = record
                .iter()
                .enumerate()
                .map(|(col, field)| {
                    parse_cell(field).ok_or_else(|| {
                        CliError::Parse(format!("{name}:{}:{}: cannot parse {field:?}", line + 2, col + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self {
            name: name.to_string(),
            header: Some(header),
            rows,
        })
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        json!({ "header": self.header, "rows": rows })
    }
}

fn parse_cell(field: &str) -> Option<Cell> {
    if field.is_empty() {
        Some(Cell::Empty)
    } else if let Ok(i) = field.parse::<i64>() {
        // integral reals such as `1` come back as Int; compare by value
        Some(Cell::Int(i))
    } else {
        field.parse::<f64>().ok().map(Cell::Real)
    }
}

/// A rendered plot and the table it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub table: String,
    pub svg: String,
}

#[derive(Debug, Clone, Default)]
pub struct Metadata {
    pub command: String,
    pub seed: Option<u64>,
    pub mc_iter: Option<usize>,
    pub datasets: Option<usize>,
    pub workers: Option<usize>,
    pub method: Option<String>,
    pub wall_time_s: f64,
}

/// Everything one run produces. The first table is the primary output.
#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
    pub notes: Vec<String>,
    pub metadata: Metadata,
}

impl Bundle {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Checks that every plot refers to a table in the bundle.
    pub fn check(&self) -> Result<()> {
        match self.plots.iter().find(|p| self.table(&p.table).is_none()) {
            Some(p) => Err(CliError::Numerical(format!(
                "plot {} refers to missing table {}",
                p.name, p.table
            ))),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        let m = &self.metadata;
        let mut tables = Map::new();
        for t in &self.tables {
            tables.insert(t.name.clone(), t.to_json());
        }
        let doc = json!({
            "command": m.command,
            "version": bayes_assurance::VERSION,
            "cli_version": env!("CARGO_PKG_VERSION"),
            "method": m.method,
            "seed": m.seed,
            "mc_iter": m.mc_iter,
            "datasets": m.datasets,
            "workers": m.workers,
            "wall_time_s": m.wall_time_s,
            "tables": tables,
            "plots": self.plots.iter().map(|p| json!({ "name": p.name, "table": p.table })).collect::<Vec<_>>(),
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("serializable");
        let _ = writeln!(out);
        out
    }
}

//! Typed access to one command's key-value section.
//!
//! Every getter records the key it read; [`Params::finish`] then rejects any
//! key nobody asked for, so typos surface as errors rather than defaults.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use bayes_assurance::Alternative;
use nalgebra::{DMatrix, DVector};
use toml::{Table, Value};

use crate::error::{usage, CliError, Result};

pub struct Params {
    command: String,
    table: Table,
    base_dir: PathBuf,
    used: RefCell<BTreeSet<String>>,
}

/// A sample-size grid and whether it was written as a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub values: Vec<T>,
    pub scalar: bool,
}

fn type_name(v: &Value) -> &'static str {
    v.type_str()
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl Params {
    pub fn new(command: &str, table: Table, base_dir: PathBuf) -> Self {
        Self {
            command: command.to_string(),
            table,
            base_dir,
            used: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.table.get(key)
    }

    fn missing(&self, key: &str) -> CliError {
        usage(format!("missing required key `{key}` for command {}", self.command))
    }

    fn wrong(&self, key: &str, expected: &str, got: &Value) -> CliError {
        usage(format!("key `{key}` must be {expected}, got {}", type_name(got)))
    }

    /// Rejects keys that no getter consumed.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .table
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(usage(format!(
                "unknown key{} {} for command {}",
                if unknown.len() > 1 { "s" } else { "" },
                unknown.iter().map(|k| format!("`{k}`")).collect::<Vec<_>>().join(", "),
                self.command
            )))
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => as_f64(v).map(Some).ok_or_else(|| self.wrong(key, "a number", v)),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.opt_f64(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(v) => Err(self.wrong(key, "a nonnegative integer", v)),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.opt_usize(key)?.unwrap_or(default))
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>> {
        Ok(self.opt_usize(key)?.map(|v| v as u64))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(v) => Err(self.wrong(key, "true or false", v)),
        }
    }

    pub fn alt_or(&self, default: Alternative) -> Result<Alternative> {
        match self.get("alt") {
            None => Ok(default),
            Some(Value::String(s)) => s.parse().map_err(|e: bayes_assurance::Error| usage(e.to_string())),
            Some(v) => Err(self.wrong("alt", "a string", v)),
        }
    }

    /// Numbers given as a scalar, an array, or `{ from, to, by }` (inclusive).
    fn numbers(&self, key: &str) -> Result<Option<(Vec<f64>, bool)>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        if let Some(x) = as_f64(v) {
            return Ok(Some((vec![x], true)));
        }
        match v {
            Value::Array(items) => {
                let xs = items
                    .iter()
                    .map(|item| as_f64(item).ok_or_else(|| self.wrong(key, "an array of numbers", item)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Some((xs, false)))
            }
            Value::Table(t) => Ok(Some((self.sequence(key, t)?, false))),
            other => Err(self.wrong(key, "a number, an array or { from, to, by }", other)),
        }
    }

    fn sequence(&self, key: &str, t: &Table) -> Result<Vec<f64>> {
        let part = |name: &str| -> Result<f64> {
            let v = t
                .get(name)
                .ok_or_else(|| usage(format!("sequence `{key}` is missing `{name}`")))?;
            as_f64(v).ok_or_else(|| usage(format!("`{key}.{name}` must be a number")))
        };
        if let Some(extra) = t.keys().find(|k| !matches!(k.as_str(), "from" | "to" | "by")) {
            return Err(usage(format!(
                "unknown key `{key}.{extra}`; a sequence takes from, to, by"
            )));
        }
        let (from, to, by) = (part("from")?, part("to")?, part("by")?);
        if !(by > 0.0) || to < from {
            return Err(usage(format!("sequence `{key}` needs by > 0 and to >= from")));
        }
        let steps = ((to - from) / by + 1e-9).floor() as usize;
        Ok((0..=steps).map(|i| from + by * i as f64).collect())
    }

    pub fn reals(&self, key: &str) -> Result<Grid<f64>> {
        let (values, scalar) = self.numbers(key)?.ok_or_else(|| self.missing(key))?;
        if values.is_empty() {
            return Err(usage(format!("`{key}` is empty")));
        }
        Ok(Grid { values, scalar })
    }

    pub fn opt_reals(&self, key: &str) -> Result<Option<Vec<f64>>> {
        Ok(self.numbers(key)?.map(|(v, _)| v))
    }

    pub fn sizes(&self, key: &str) -> Result<Grid<usize>> {
        let grid = self.reals(key)?;
        let values = grid
            .values
            .iter()
            .map(|&x| {
                if x >= 1.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(usage(format!("`{key}` must hold whole numbers >= 1, found {x}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Grid {
            values,
            scalar: grid.scalar,
        })
    }

    pub fn opt_vector(&self, key: &str) -> Result<Option<DVector<f64>>> {
        Ok(self.numbers(key)?.map(|(v, _)| DVector::from_vec(v)))
    }

    pub fn vector(&self, key: &str) -> Result<DVector<f64>> {
        self.opt_vector(key)?.ok_or_else(|| self.missing(key))
    }

    /// A matrix as rows (`[[..], [..]]`), a scalar (1×1), a CSV file path
    /// relative to the config file, or `{ scale, rows }` / `{ scale, file }`.
    pub fn opt_matrix(&self, key: &str) -> Result<Option<DMatrix<f64>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        self.matrix_value(key, v).map(Some)
    }

    pub fn matrix(&self, key: &str) -> Result<DMatrix<f64>> {
        self.opt_matrix(key)?.ok_or_else(|| self.missing(key))
    }

    fn matrix_value(&self, key: &str, v: &Value) -> Result<DMatrix<f64>> {
        if let Some(x) = as_f64(v) {
            return Ok(DMatrix::from_element(1, 1, x));
        }
        match v {
            Value::String(path) => read_matrix_csv(&self.base_dir.join(path)),
            Value::Array(rows) => rows_to_matrix(key, rows),
            Value::Table(t) => {
                if let Some(extra) = t.keys().find(|k| !matches!(k.as_str(), "scale" | "rows" | "file")) {
                    return Err(usage(format!(
                        "unknown key `{key}.{extra}`; a matrix table takes scale and rows or file"
                    )));
                }
                let scale = match t.get("scale") {
                    None => 1.0,
                    Some(s) => as_f64(s).ok_or_else(|| usage(format!("`{key}.scale` must be a number")))?,
                };
                let base = match (t.get("rows"), t.get("file")) {
                    (Some(Value::Array(rows)), None) => rows_to_matrix(key, rows)?,
                    (None, Some(Value::String(path))) => read_matrix_csv(&self.base_dir.join(path))?,
                    _ => return Err(usage(format!("`{key}` needs exactly one of `rows` or `file`"))),
                };
                Ok(base * scale)
            }
            other => Err(self.wrong(key, "a matrix", other)),
        }
    }

    /// `[[size, value], ...]` pairs for a block-diagonal covariance.
    pub fn opt_blocks(&self, key: &str) -> Result<Option<Vec<(usize, f64)>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let Value::Array(items) = v else {
            return Err(self.wrong(key, "an array of [size, value] pairs", v));
        };
        items
            .iter()
            .map(|item| match item {
                Value::Array(pair) if pair.len() == 2 => match (&pair[0], as_f64(&pair[1])) {
                    (Value::Integer(n), Some(x)) if *n >= 1 => Ok((*n as usize, x)),
                    _ => Err(usage(format!("`{key}` entries must be [size >= 1, value]"))),
                },
                _ => Err(usage(format!("`{key}` entries must be [size, value] pairs"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    pub fn opt_ints(&self, key: &str) -> Result<Option<Vec<i64>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        match v {
            Value::Integer(i) => Ok(Some(vec![*i])),
            Value::Array(items) => items
                .iter()
                .map(|item| match item {
                    Value::Integer(i) => Ok(*i),
                    other => Err(self.wrong(key, "an array of integers", other)),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            other => Err(self.wrong(key, "an array of integers", other)),
        }
    }
}

fn rows_to_matrix(key: &str, rows: &[Value]) -> Result<DMatrix<f64>> {
    let parsed = rows
        .iter()
        .map(|row| match row {
            Value::Array(cells) => cells
                .iter()
                .map(|c| as_f64(c).ok_or_else(|| usage(format!("`{key}` entries must be numbers"))))
                .collect::<Result<Vec<_>>>(),
            _ => Err(usage(format!("`{key}` must be an array of rows"))),
        })
        .collect::<Result<Vec<_>>>()?;
    build_matrix(&parsed).map_err(|m| usage(format!("`{key}`: {m}")))
}

fn build_matrix(rows: &[Vec<f64>]) -> std::result::Result<DMatrix<f64>, String> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err("matrix is empty".into());
    }
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(format!("row {} has {} entries, expected {ncols}", i + 1, rows[i].len()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Reads a headerless numeric CSV file.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| usage(format!("cannot read matrix file {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| {
                    CliError::Parse(format!(
                        "{}:{}:{}: cannot parse {field:?} as a number",
                        path.display(),
                        line + 1,
                        col + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    build_matrix(&rows).map_err(|m| CliError::Parse(format!("{}: {m}", path.display())))
}

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::args::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    /// Several numbers in one field, `;`-separated in CSV.
    Nums(Vec<f64>),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// 17 significant digits: enough to recover the exact double.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => fmt_num(*v),
            Cell::Nums(v) => v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(";"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        let num = |x: f64| serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Num(v) => num(*v),
            Cell::Nums(v) => Value::Array(v.iter().map(|x| num(*x)).collect()),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

pub const KERNEL: &[&str] = &["n", "tau", "x", "y", "s", "d", "i", "residual_frobenius"];
pub const RHO: &[&str] = &["n", "tau", "points", "rho"];
pub const MOMENT_EXACT: &[&str] = &["n", "tau", "ell", "mu", "method", "exact_log", "value"];
pub const COMPARISON: &[&str] =
    &["n", "tau", "ell", "mu", "exact_log", "asymptotic_log", "mc_log", "mc_stderr_rel", "ratio"];
pub const CONSTANTS: &[&str] = &["ell", "tau", "c_tau_log", "c_script", "c_script_closed", "conjecture_log"];
pub const SAMPLE: &[&str] = &["stream", "draw", "row", "col", "value"];
pub const VERIFY: &[&str] = &["suite", "check", "passed", "detail"];

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    }

    fn write_json<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.header.iter().zip(row).map(|(k, c)| (k.to_string(), c.json())).collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &rows).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(out).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(p) => {
                let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                let w = io::BufWriter::new(f);
                match format {
                    Format::Csv => self.write_csv(w),
                    Format::Json => self.write_json(w),
                }
            }
            None => {
                let w = io::stdout().lock();
                match format {
                    Format::Csv => self.write_csv(w),
                    Format::Json => self.write_json(w),
                }
            }
        }
    }
}

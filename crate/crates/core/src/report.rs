//! JSON and CSV emission with stable field order and floats rounded to 12
//! significant digits.

use std::str::FromStr;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::algebra::ValidationReport;
use crate::analysis::{
    AreaReport, FactorReport, FiliformArea, HolderFit, IntegrabilityReport, InvarianceReport, LayerProfile,
    PatchedComparison, QcReport, SliceReport, UnboundednessReport,
};
use crate::calculus::PansuReport;
use crate::error::{CarnotError, Result};
use crate::mollify::ConvergenceReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CarnotError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(CarnotError::UnsupportedFormat(other.to_string())),
        }
    }
}

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("exponent notation parses")
}

/// Plain decimal in the usual range, exponent notation outside it.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    let r = round_sig(x);
    if r == 0.0 || r.is_infinite() || (1e-5..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *v = Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serialized form with rounded floats; non-finite floats become `null`.
pub fn to_value<T: Serialize + ?Sized>(report: &T) -> Result<Value> {
    let mut v = serde_json::to_value(report).map_err(|e| CarnotError::UnsupportedFormat(e.to_string()))?;
    round_value(&mut v);
    Ok(v)
}

pub fn emit_json<T: Serialize + ?Sized>(report: &T) -> Result<String> {
    Ok(to_value(report)?.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
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

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Table) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        Value::Null => out.push(vec![Cell::Text(prefix.into()), Cell::Empty]),
        Value::Bool(b) => out.push(vec![Cell::Text(prefix.into()), Cell::Bool(*b)]),
        Value::Number(n) => {
            let cell = match n.as_i64() {
                Some(i) => Cell::Int(i),
                None => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
            };
            out.push(vec![Cell::Text(prefix.into()), cell]);
        }
        Value::String(s) => out.push(vec![Cell::Text(prefix.into()), Cell::Text(s.clone())]),
    }
}

/// Flat CSV view of a report. The fallback is a `key,value` listing of
/// the JSON tree with dotted paths.
pub trait Tabular: Serialize {
    fn table(&self) -> Result<Table> {
        let mut t = Table::new(&["key", "value"]);
        flatten("", &to_value(self)?, &mut t);
        Ok(t)
    }
}

pub fn emit_csv<T: Tabular + ?Sized>(report: &T) -> Result<String> {
    let table = report.table()?;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let io = |e: csv::Error| CarnotError::UnsupportedFormat(e.to_string());
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CarnotError::UnsupportedFormat(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CarnotError::UnsupportedFormat(e.to_string()))
}

pub fn emit_report<T: Tabular + ?Sized>(report: &T, format: Format) -> Result<String> {
    match format {
        Format::Json => emit_json(report),
        Format::Csv => emit_csv(report),
    }
}

fn coordinate_header(first: &[&str], dim: usize, last: &[&str]) -> Vec<String> {
    first
        .iter()
        .map(|s| s.to_string())
        .chain((1..=dim).map(|i| format!("x{i}")))
        .chain(last.iter().map(|s| s.to_string()))
        .collect()
}

impl Tabular for ValidationReport {
    fn table(&self) -> Result<Table> {
        let mut t = Table::new(&["violation"]);
        for v in &self.violations {
            t.push(vec![Cell::Text(v.to_string())]);
        }
        Ok(t)
    }
}

impl Tabular for ConvergenceReport {
    fn table(&self) -> Result<Table> {
        let mut t = Table::new(&["eps", "norm", "slope"]);
        for r in &self.rows {
            t.push(vec![r.eps.into(), r.norm.into(), r.slope.into()]);
        }
        Ok(t)
    }
}

impl Tabular for IntegrabilityReport {
    fn table(&self) -> Result<Table> {
        let mut t = Table::new(&["n", "sum"]);
        for (n, s) in self.n.iter().zip(&self.sums) {
            t.push(vec![(*n).into(), (*s).into()]);
        }
        Ok(t)
    }
}

impl Tabular for InvarianceReport {
    fn table(&self) -> Result<Table> {
        let dim = self.points.first().map_or(0, |p| p.point.len());
        let mut t = Table {
            header: coordinate_header(&[], dim, &["det", "residual", "stable"]),
            rows: Vec::new(),
        };
        for p in &self.points {
            let mut row: Vec<Cell> = p.point.iter().map(|&x| x.into()).collect();
            row.extend([p.det.into(), p.residual.into(), p.stable.into()]);
            t.push(row);
        }
        Ok(t)
    }
}

impl Tabular for SliceReport {
    fn table(&self) -> Result<Table> {
        let mut t = Table::new(&["point", "s", "det"]);
        for (i, dets) in self.dets.iter().enumerate() {
            for (s, d) in self.s_values.iter().zip(dets) {
                t.push(vec![i.into(), (*s).into(), (*d).into()]);
            }
        }
        Ok(t)
    }
}

impl Tabular for QcReport {
    fn table(&self) -> Result<Table> {
        let mut t = Table::new(&["point", "r", "max", "min", "h"]);
        for (i, d) in self.distortion.iter().enumerate() {
            t.push(vec![i.into(), d.r.into(), d.max.into(), d.min.into(), d.h.into()]);
        }
        Ok(t)
    }
}

impl Tabular for FactorReport {
    fn table(&self) -> Result<Table> {
        let dim = self.points.first().map_or(0, |p| p.point.len());
        let mut t = Table {
            header: coordinate_header(&[], dim, &["sigma", "residual", "ambiguous"]),
            rows: Vec::new(),
        };
        for p in &self.points {
            let mut row: Vec<Cell> = p.point.iter().map(|&x| x.into()).collect();
            let sigma = p.sigma.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            row.extend([sigma.into(), p.residual.into(), p.ambiguous.into()]);
            t.push(row);
        }
        Ok(t)
    }
}

impl Tabular for LayerProfile {
    fn table(&self) -> Result<Table> {
        let layers = self.energy.first().map_or(0, Vec::len);
        let mut header = vec!["h".to_string()];
        header.extend((1..=layers).map(|k| format!("layer{k}")));
        let mut t = Table { header, rows: Vec::new() };
        for (h, e) in self.h_values.iter().zip(&self.energy) {
            let mut row = vec![Cell::Num(*h)];
            row.extend(e.iter().map(|&x| Cell::Num(x)));
            t.push(row);
        }
        Ok(t)
    }
}

impl Tabular for UnboundednessReport {
    fn table(&self) -> Result<Table> {
        let mut t = Table::new(&["level", "area", "ratio"]);
        for ((l, a), r) in self.levels.iter().zip(&self.areas).zip(&self.ratios) {
            t.push(vec![(*l).into(), (*a).into(), (*r).into()]);
        }
        Ok(t)
    }
}

impl Tabular for PansuReport {}
impl Tabular for HolderFit {}
impl Tabular for AreaReport {}
impl Tabular for FiliformArea {}
impl Tabular for PatchedComparison {}
impl Tabular for Value {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_validation() {
        let r = ValidationReport { violations: vec![] };
        assert_eq!(emit_json(&r).unwrap(), r#"{"violations":[]}"#);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(2.5e-9), "2.5e-9");
        assert_eq!(format_float(f64::NAN), "NaN");
        assert_eq!(emit_json(&vec![f64::NAN, 1.0]).unwrap(), "[null,1.0]");
    }

    #[test]
    fn flat_fallback() {
        let v: Value = serde_json::json!({"a": {"b": [1, 2.5]}, "c": "x,y"});
        let csv = emit_csv(&v).unwrap();
        assert_eq!(csv, "key,value\na.b.0,1\na.b.1,2.5\nc,\"x,y\"\n");
    }

    #[test]
    fn unknown_format() {
        assert!("xml".parse::<Format>().is_err());
    }
}

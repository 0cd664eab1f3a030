//! Rows of results and their table / JSON / CSV renderings.
//!
//! Numbers are always printed with six significant digits so that output is
//! byte-identical for identical inputs.

use std::fmt::Write as _;

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_sig6(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => format_sig6(*x)
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Num(x) => Value::String(format_sig6(*x)),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// Ordered key/value pairs of one result.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportRow {
    pub cells: Vec<(String, Cell)>,
}

impl ReportRow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.push(key, value);
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Cell>) {
        self.cells.push((key.to_owned(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.cells.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            Cell::Num(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.cells.iter().map(|(k, _)| k.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::invalid("format", format!("expected table, json or csv, got `{other}`"))),
        }
    }
}

/// Six significant digits, fixed notation for magnitudes in `[1e-4, 1e6)` and
/// scientific otherwise, trailing zeros trimmed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn check_columns(rows: &[ReportRow]) -> Result<Vec<&str>> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Config("nothing to render".into()))?;
    let header: Vec<&str> = first.keys().collect();
    if rows.iter().any(|r| !r.keys().eq(header.iter().copied())) {
        return Err(Error::Config("rows have different column sets".into()));
    }
    Ok(header)
}

pub fn render(rows: &[ReportRow], format: OutputFormat) -> Result<String> {
    let header = check_columns(rows)?;
    match format {
        OutputFormat::Table => Ok(render_table(&header, rows)),
        OutputFormat::Csv => render_csv(&header, rows),
        OutputFormat::Json => {
            let array: Vec<Value> = rows
                .iter()
                .map(|r| {
                    Value::Object(
                        r.cells
                            .iter()
                            .map(|(k, v)| (k.clone(), v.to_json()))
                            .collect::<Map<_, _>>(),
                    )
                })
                .collect();
            let mut out = serde_json::to_string_pretty(&Value::Array(array))
                .map_err(|e| Error::Io(e.to_string()))?;
            out.push('\n');
            Ok(out)
        }
    }
}

fn render_table(header: &[&str], rows: &[ReportRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.cells.iter().map(|(_, v)| v.render()).collect())
        .collect();
    let widths: Vec<usize> = header
        .iter()
        .enumerate()
        .map(|(i, h)| body.iter().map(|r| r[i].len()).chain([h.len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let text: Vec<String> = cells
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", text.join("  ").trim_end());
    };
    line(&mut header.iter().copied());
    for r in &body {
        line(&mut r.iter().map(String::as_str));
    }
    out
}

fn render_csv(header: &[&str], rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.cells.iter().map(|(_, v)| v.render())).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(0.040655844), "0.0406558");
        assert_eq!(format_sig6(23.4378), "23.4378");
        assert_eq!(format_sig6(8.44567891e-4), "0.000844568");
        assert_eq!(format_sig6(9.0909e-5), "9.0909e-5");
        assert_eq!(format_sig6(1e-5), "1e-5");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(9.9999996), "10");
        assert_eq!(format_sig6(-0.5), "-0.5");
        assert_eq!(format_sig6(f64::INFINITY), "inf");
        assert_eq!(format_sig6(0.0), "0");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rows = vec![ReportRow::new().with("a", 1.5).with("b", "x,y")];
        let csv = render(&rows, OutputFormat::Csv).unwrap();
        assert_eq!(csv, "a,b\n1.5,\"x,y\"\n");
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn json_preserves_order_and_values() {
        let rows = vec![ReportRow::new()
            .with("zeta", 0.0406558441)
            .with("alpha", Cell::Empty)
            .with("n", 3u64)];
        let out = render(&rows, OutputFormat::Json).unwrap();
        assert!(out.find("zeta").unwrap() < out.find("alpha").unwrap());
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[0]["zeta"].as_f64().unwrap(), 0.0406558);
        assert!(v[0]["alpha"].is_null());
    }

    #[test]
    fn mismatched_columns_rejected() {
        let rows = vec![ReportRow::new().with("a", 1.0), ReportRow::new().with("b", 1.0)];
        assert!(render(&rows, OutputFormat::Table).is_err());
        assert!(render(&[], OutputFormat::Table).is_err());
    }

    #[test]
    fn table_aligns_columns() {
        let rows = vec![
            ReportRow::new().with("name", "wcp").with("f_min", 0.04),
            ReportRow::new().with("name", "single-photon").with("f_min", 9.0909e-5),
        ];
        let t = render(&rows, OutputFormat::Table).unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0].find("f_min"), lines[1].find("0.04"));
        assert_eq!(lines[1].find("0.04"), lines[2].find("9.0909e-5"));
    }
}

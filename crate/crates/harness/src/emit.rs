//! Tabular output in CSV or JSON.
//!
//! CSV: `# key=value` metadata lines, a header row, then data rows.
//! JSON: `{"meta": {..}, "columns": [..], "rows": [[..], ..]}` with empty
//! cells as `null`. Floats carry 6 significant digits in both forms.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{config, io, HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(config(format!("unknown output format '{s}'"))),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            Self::Float(x)
        } else {
            Self::Empty
        }
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Self::Empty, Self::from)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Self::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Self::Int(i64::from(x))
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Self::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Self::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Self::Text(s)
    }
}

/// `x` with 6 significant digits, fixed notation for moderate magnitudes.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let rounded: f64 = sci.parse().expect("round trip");
    let s = format!("{rounded:.*}", (5 - exp) as usize);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Int(i) => write!(f, "{i}"),
            Self::Float(x) => f.write_str(&format_float(*x)),
            Self::Text(s) => f.write_str(s),
            Self::Empty => Ok(()),
        }
    }
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Self::Int(i) => Value::from(*i),
            Self::Float(x) => format_float(*x)
                .parse::<f64>()
                .map_or(Value::Null, Value::from),
            Self::Text(s) => Value::from(s.as_str()),
            Self::Empty => Value::Null,
        }
    }
}

/// Metadata pairs, column names and rendered rows.
pub type ParsedCsv = (Vec<(String, String)>, Vec<String>, Vec<Vec<String>>);

/// A titled table with ordered metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.meta.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    /// Cells as they appear in CSV output.
    pub fn rendered(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(Cell::to_string).collect())
            .collect()
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k}={v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in self.rendered() {
            w.write_record(&row)?;
        }
        w.flush()
    }

    fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), Value::from(v.as_str()));
        }
        let mut doc = Map::new();
        doc.insert("meta".into(), Value::Object(meta));
        doc.insert("columns".into(), Value::from(self.columns.clone()));
        doc.insert(
            "rows".into(),
            Value::Array(
                self.rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
                    .collect(),
            ),
        );
        serde_json::to_writer_pretty(&mut out, &Value::Object(doc))?;
        writeln!(out)
    }

    pub fn to_string(&self, format: Format) -> String {
        let mut buf = Vec::new();
        self.write(format, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }

    /// Parses CSV output back into metadata, header and rendered cells.
    pub fn parse_csv(text: &str) -> Result<ParsedCsv> {
        let mut meta = Vec::new();
        let mut body = String::new();
        for line in text.lines() {
            match line.strip_prefix("# ") {
                Some(m) if body.is_empty() => {
                    let (k, v) = m
                        .split_once('=')
                        .ok_or_else(|| config(format!("bad metadata line '{line}'")))?;
                    meta.push((k.to_owned(), v.to_owned()));
                }
                _ => {
                    body.push_str(line);
                    body.push('\n');
                }
            }
        }
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let columns = r
            .headers()
            .map_err(|e| config(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| config(e.to_string()))?;
        Ok((meta, columns, rows))
    }
}

/// Writes `table` to `path`, or to standard output when `path` is `None`.
pub fn emit(table: &Table, format: Format, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(io(p))?;
            let mut w = BufWriter::new(f);
            table.write(format, &mut w).map_err(io(p))?;
            w.flush().map_err(io(p))
        }
        None => {
            let stdout = std::io::stdout();
            table.write(format, stdout.lock()).map_err(io("<stdout>"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.1234567), "0.123457");
        assert_eq!(format_float(-2.5), "-2.5");
        assert_eq!(format_float(123456.7), "123457");
        assert_eq!(format_float(999999.7), "1e6");
        assert_eq!(format_float(1234567.0), "1.23457e6");
        assert_eq!(format_float(0.0000123456789), "1.23457e-5");
        assert_eq!(format_float(0.000123456789), "0.000123457");
        assert_eq!(format_float(0.99999999), "1");
    }

    fn sample() -> Table {
        let mut t = Table::new(&["name", "n", "value"])
            .meta("seed", 7)
            .meta("tool", "kvldp");
        t.push(vec!["a,b".into(), Cell::Int(3), 0.25.into()]);
        t.push(vec!["c".into(), Cell::Empty, f64::NAN.into()]);
        t
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let text = t.to_string(Format::Csv);
        assert!(text.starts_with("# seed=7\n# tool=kvldp\nname,n,value\n"));
        let (meta, cols, rows) = Table::parse_csv(&text).unwrap();
        assert_eq!(meta, t.meta);
        assert_eq!(cols, t.columns);
        assert_eq!(rows, t.rendered());
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_str(&sample().to_string(Format::Json)).unwrap();
        assert_eq!(v["meta"]["seed"], "7");
        assert_eq!(v["columns"][2], "value");
        assert_eq!(v["rows"][0][2], 0.25);
        assert!(v["rows"][1][1].is_null());
        assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    }
}

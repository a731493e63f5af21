// SPDX-License-Identifier: Apache-2.0

//! Result tables: CSV with a `#` metadata block, or a JSON document.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 17 significant digits: lossless for every finite f64
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// One emitted artifact: ordered metadata, a fixed column list and rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.meta.push((key.into(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {}", v.csv()).map_err(CliError::io)?;
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns).map_err(CliError::csv)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))
                .map_err(CliError::csv)?;
        }
        w.flush().map_err(CliError::io)
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let meta: Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), v.json()))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(m)
            })
            .collect();
        let doc = json!({ "meta": meta, "columns": self.columns, "rows": rows });
        serde_json::to_writer_pretty(&mut *out, &doc).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(out).map_err(CliError::io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["p", "re", "label"]);
        t.meta("mode", "rate");
        t.push(vec![0.1.into(), (1.0 / 3.0).into(), "x".into()]);
        t.push(vec![2.0.into(), f64::NAN.into(), "y".into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write(Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# mode: rate");
        assert_eq!(lines[1], "p,re,label");
        assert_eq!(lines[2], "1.0000000000000001e-1,3.3333333333333331e-1,x");
        assert_eq!(lines[3], "2.0000000000000000e0,NaN,y");
    }

    #[test]
    fn csv_floats_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            6.02214076e23,
            -1e-300,
            f64::MIN_POSITIVE,
            123456789.123456789,
        ] {
            let s = Cell::Float(x).csv();
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        sample().write(Format::Json, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["meta"]["mode"], "rate");
        assert_eq!(v["rows"][0]["label"], "x");
        assert_eq!(v["rows"][0]["re"].as_f64().unwrap(), 1.0 / 3.0);
        assert!(v["rows"][1]["re"].is_null());
    }
}

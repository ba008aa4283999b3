//! Tabular artifacts rendered as CSV or JSON.

use crate::config::Format;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
}

impl Cell {
    fn text(self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(x),
        }
    }

    fn json(self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Real(x) if x.is_finite() => json!(x),
            Cell::Real(x) => json!(x.to_string()),
        }
    }
}

/// Shortest round-trip text; scientific outside `[1e-4, 1e15)`. Negative zero prints as `0`.
pub fn format_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A named table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &'static str) -> Self {
        Self { name: name.to_string(), header: header_fields(header), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self, format: Format) -> String {
        format!("{}.{}", self.name, format.extension())
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header).expect("in-memory write");
                for row in &self.rows {
                    w.write_record(row.iter().map(|c| c.text())).expect("in-memory write");
                }
                w.into_inner().expect("in-memory flush")
            }
            Format::Json => {
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(|c| c.json()).collect())).collect();
                let mut out = serde_json::to_vec(&json!({ "columns": self.header, "rows": rows })).expect("serializable");
                out.push(b'\n');
                out
            }
        }
    }
}

fn header_fields(header: &'static str) -> Vec<&'static str> {
    header.split(',').collect()
}

/// `(t, n, |u_n|²)` rows for a sequence of intensity snapshots.
pub fn intensity_table(times: &[f64], first_site: i64, frames: &[Vec<f64>], header: &'static str) -> Table {
    let mut t = Table::new("intensity", header);
    for (time, frame) in times.iter().zip(frames) {
        for (i, v) in frame.iter().enumerate() {
            t.push(vec![Cell::Real(*time), Cell::Int(first_site + i as i64), Cell::Real(*v)]);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1e-300, 123.456, -2.5e20, 0.0] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_real(0.5), "0.5");
        assert_eq!(format_real(1e-6), "1e-6");
    }

    #[test]
    fn csv_has_header_even_when_empty() {
        let t = Table::new("x", "t,value");
        assert_eq!(t.render(Format::Csv), b"t,value\n");
    }
}

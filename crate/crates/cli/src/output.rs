//! Row tables and their CSV / JSON serializations.

use std::io::Write;

use serde_json::{Map, Number, Value};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    UInt(u64),
    Float(f64),
    Bool(bool),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Shortest decimal string that parses back to the same double.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let a = v.abs();
    if (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => format_f64(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Str(s) => Value::String(s.clone()),
            Cell::UInt(v) => Value::Number((*v).into()),
            Cell::Float(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

/// A command's output: fixed column schema, one flat row per result, and the echoed parameters.
#[derive(Debug, Clone)]
pub struct OutputRecord {
    pub command: &'static str,
    pub params: Map<String, Value>,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl OutputRecord {
    pub fn new(command: &'static str, columns: &'static [&'static str], params: Map<String, Value>) -> Self {
        Self {
            command,
            params,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        w.flush()
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.to_json()))
                        .collect(),
                )
            })
            .collect();
        let mut params = Map::new();
        params.insert("command".into(), Value::String(self.command.into()));
        params.extend(self.params.clone());
        let mut root = Map::new();
        root.insert("schema_version".into(), Value::String(SCHEMA_VERSION.into()));
        root.insert("params".into(), Value::Object(params));
        root.insert("rows".into(), Value::Array(rows));
        Value::Object(root)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        out.write_all(b"\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 2.5e-6, 123456.789, 1e20, -0.25, 0.0] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_f64(0.5), "0.5");
        assert_eq!(format_f64(1e-7), "1e-7");
    }

    #[test]
    fn csv_has_header_and_lf() {
        let mut r = OutputRecord::new("x", &["a", "b"], Map::new());
        r.push(vec![Cell::from("cp"), Cell::from(0.25)]);
        r.push(vec![Cell::Empty, Cell::from(3u64)]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\ncp,0.25\n,3\n");
    }

    #[test]
    fn csv_round_trips_rows() {
        let mut r = OutputRecord::new("x", &["s", "u", "f", "b", "e"], Map::new());
        for (i, v) in [0.1, 1.0 / 3.0, 2.5e-300, 1e-5 * 0.999, 0.987_654_321_012_345_6]
            .iter()
            .enumerate()
        {
            r.push(vec![
                Cell::from("wilson"),
                Cell::from(i as u64),
                Cell::from(*v),
                Cell::from(i % 2 == 0),
                Cell::Empty,
            ]);
        }
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(rd.headers().unwrap(), vec!["s", "u", "f", "b", "e"]);
        for (rec, row) in rd.records().zip(&r.rows) {
            let rec = rec.unwrap();
            let parsed = vec![
                Cell::from(&rec[0]),
                Cell::from(rec[1].parse::<u64>().unwrap()),
                Cell::from(rec[2].parse::<f64>().unwrap()),
                Cell::from(rec[3].parse::<bool>().unwrap()),
                if rec[4].is_empty() {
                    Cell::Empty
                } else {
                    Cell::from(&rec[4])
                },
            ];
            assert_eq!(&parsed, row);
        }
    }

    #[test]
    fn json_layout() {
        let mut r = OutputRecord::new("x", &["a"], Map::new());
        r.push(vec![Cell::from(Some(1.5))]);
        let v = r.to_json();
        assert_eq!(v["schema_version"], "1");
        assert_eq!(v["params"]["command"], "x");
        assert_eq!(v["rows"][0]["a"], 1.5);
    }
}

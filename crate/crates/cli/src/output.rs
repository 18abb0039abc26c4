//! Rendering of records and row tables as JSON, CSV or an aligned table.
//!
//! Floats are rounded to 12 significant digits and then printed in their
//! shortest round-trip form; exact integers print in full.

use serde::Serialize;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round12(x);
    if r != 0.0 && (r.abs() < 1e-5 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// One cell of a row table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Exact integer, kept as its decimal text.
    Int(String),
    Num(f64),
    Missing,
}

impl Cell {
    pub fn int(v: impl ToString) -> Cell {
        Cell::Int(v.to_string())
    }

    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Missing, Cell::Num)
    }

    fn text(&self) -> String {
        match self {
            Cell::Int(s) => s.clone(),
            Cell::Num(x) => fmt_f64(*x),
            Cell::Missing => "NaN".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(s) => {
                serde_json::from_str::<Number>(s).map(Value::Number).unwrap_or_else(|_| Value::String(s.clone()))
            }
            Cell::Num(x) => Number::from_f64(round12(*x)).map_or(Value::Null, Value::Number),
            Cell::Missing => Value::Null,
        }
    }
}

/// Named columns of numeric cells.
#[derive(Debug, Clone, Default)]
pub struct Rows {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Rows {
    pub fn new(columns: Vec<&'static str>) -> Rows {
        Rows { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = self.columns.join(",") + "\n";
                for row in &self.rows {
                    out += &row.iter().map(Cell::text).collect::<Vec<_>>().join(",");
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> =
                            self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                        Value::Object(obj)
                    })
                    .collect();
                serde_json::to_string_pretty(&Value::Array(rows)).expect("rows serialise") + "\n"
            }
            Format::Table => {
                let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|c| cells.iter().map(|r| r[c].len()).chain([self.columns[c].len()]).max().unwrap_or(0))
                    .collect();
                let line = |items: Vec<&str>| {
                    items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect::<Vec<_>>().join("  ")
                };
                let mut out = line(self.columns.clone()) + "\n";
                for r in &cells {
                    out += &line(r.iter().map(String::as_str).collect());
                    out.push('\n');
                }
                out
            }
        }
    }
}

/// Rounds every non-integer number in place.
fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(r) = n.as_f64().and_then(|x| Number::from_f64(round12(x))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        Value::Number(n) => fmt_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(","),
        Value::Object(_) => String::new(),
    }
}

fn is_flag(v: &Value) -> bool {
    v.get("name").is_some() && v.get("passed").is_some()
}

fn flatten_pairs(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_pairs(&key, inner, out);
            }
        }
        Value::Array(items) if items.iter().all(is_flag) && !items.is_empty() => {
            for f in items {
                let mark = if f["passed"] == Value::Bool(true) { "PASS" } else { "FAIL" };
                let detail = f.get("detail").and_then(Value::as_str).unwrap_or("");
                let name = f["name"].as_str().unwrap_or("");
                out.push((format!("[{mark}] {name}"), detail.to_string()));
            }
        }
        Value::Array(items) if items.iter().any(Value::is_object) => {
            for (i, inner) in items.iter().enumerate() {
                flatten_pairs(&format!("{prefix}[{i}]"), inner, out);
            }
        }
        scalar => out.push((prefix.to_string(), scalar_text(scalar))),
    }
}

fn flatten_numeric(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_numeric(&key, inner, out);
            }
        }
        Value::Number(_) => out.push((prefix.to_string(), scalar_text(v))),
        Value::Bool(b) => out.push((prefix.to_string(), (*b as u8).to_string())),
        Value::Null => out.push((prefix.to_string(), "NaN".into())),
        _ => {}
    }
}

/// Renders one record. CSV keeps the numeric and boolean fields only, with
/// absent values as `NaN`.
pub fn render_record<T: Serialize>(record: &T, format: Format) -> String {
    let mut v = serde_json::to_value(record).expect("record serialises");
    round_value(&mut v);
    match format {
        Format::Json => serde_json::to_string_pretty(&v).expect("value serialises") + "\n",
        Format::Csv => {
            let mut pairs = Vec::new();
            flatten_numeric("", &v, &mut pairs);
            let (keys, values): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            format!("{}\n{}\n", keys.join(","), values.join(","))
        }
        Format::Table => {
            let mut pairs = Vec::new();
            flatten_pairs("", &v, &mut pairs);
            let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            pairs.iter().map(|(k, val)| format!("{k:<width$}  {val}").trim_end().to_string() + "\n").collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f64(4.0 * 3f64.sqrt()), "6.92820323028");
        assert_eq!(fmt_f64(4.0 * 2f64.sqrt()), "5.65685424949");
        assert_eq!(fmt_f64(2.0), "2");
        assert_eq!(fmt_f64(5.971183286307139e-10), "5.97118328631e-10");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(round12(0.1 + 0.2), 0.3);
    }

    #[test]
    fn rows_in_every_format() {
        let mut rows = Rows::new(vec!["order", "moment", "root"]);
        rows.push(vec![Cell::int(2), Cell::int("123456789012345678901234567890"), Cell::Num(1.0)]);
        rows.push(vec![Cell::int(4), Cell::int(2), Cell::Missing]);
        assert_eq!(rows.render(Format::Csv), "order,moment,root\n2,123456789012345678901234567890,1\n4,2,NaN\n");
        let json: Value = serde_json::from_str(&rows.render(Format::Json)).unwrap();
        assert_eq!(json[1]["root"], Value::Null);
        assert_eq!(json[0]["order"], Value::from(2));
        let table = rows.render(Format::Table);
        assert!(table.lines().all(|l| l.len() == table.lines().next().unwrap().len()));
    }

    #[test]
    fn records_round_and_flatten() {
        #[derive(Serialize)]
        struct R {
            x: f64,
            n: Option<f64>,
            name: &'static str,
            inner: (u64, bool),
        }
        let r = R { x: 1.0 / 3.0, n: None, name: "a", inner: (7, true) };
        assert!(render_record(&r, Format::Json).contains("0.333333333333"));
        assert_eq!(render_record(&r, Format::Csv), "x,n\n0.333333333333,NaN\n");
        let table = render_record(&r, Format::Table);
        assert!(table.lines().any(|l| l == "name   a"), "{table}");
        assert!(table.lines().any(|l| l == "n      -"), "{table}");
    }
}

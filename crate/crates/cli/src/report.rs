//! Report envelopes and deterministic JSON/CSV emission.

use std::io::Write;
use std::path::Path;

use fillin_core::Error;
use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};
use serde_json::{Map, Value};

/// Writes every float as `{:.16e}` (17 significant digits).
struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser).map_err(|e| Error::Parse(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

pub fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// One summary cell of a sweep row.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Num(_) => String::new(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn to_value(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Sweep row: grid value and summary cells.
pub type SummaryRow = (Option<f64>, Vec<(&'static str, Cell)>);

/// Result of one command invocation, before it is rendered.
pub struct Outcome {
    pub result: Value,
    pub tolerances: Value,
    pub grid: Value,
    /// Columns used by sweeps.
    pub summary: Vec<(&'static str, Cell)>,
    pub csv: Option<String>,
    pub text: Option<String>,
}

impl Outcome {
    pub fn new(result: Value) -> Self {
        Outcome {
            result,
            tolerances: Value::Object(Map::new()),
            grid: Value::Object(Map::new()),
            summary: vec![],
            csv: None,
            text: None,
        }
    }
}

pub fn envelope(command: &str, parameters: Value, seed: u64, body: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), Value::String(command.into()));
    m.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    m.insert("parameters".into(), parameters);
    m.insert("seed".into(), Value::from(seed));
    for (k, v) in body {
        m.insert(k.into(), v);
    }
    Value::Object(m)
}

pub fn summary_csv(param: Option<&str>, rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let Some((_, first)) = rows.first() else { return out };
    let mut head: Vec<&str> = param.into_iter().collect();
    head.extend(first.iter().map(|(k, _)| *k));
    out.push_str(&head.join(","));
    out.push('\n');
    for (p, cells) in rows {
        let mut line: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
        line.extend(cells.iter().map(|(_, c)| c.render()));
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn summary_rows_json(param: &str, rows: &[SummaryRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|(p, cells)| {
                let mut m = Map::new();
                if let Some(p) = p {
                    m.insert(param.into(), Value::from(*p));
                }
                for (k, c) in cells {
                    m.insert((*k).into(), c.to_value());
                }
                Value::Object(m)
            })
            .collect(),
    )
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string()))
        }
    }
}

//! Delimited result tables with a comment preamble.
//!
//! ```text
//! # olg-table: transfer-grid
//! # version: 0.1.0
//! # seed: 0
//! # config-begin
//! # bundle = "original"
//! # ...
//! # config-end
//! safe_annual,risky_annual,welfare_change,status
//! -2,0,1.001417343,ok
//! ```
//!
//! Numbers carry 10 significant digits.

use std::io::Write;
use std::path::Path;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<i8> for Value {
    fn from(v: i8) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Int(v as i64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            Value::Num(x) => format_g10(*x),
            Value::Int(i) => i.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

/// Formats like C's `%.10g`.
pub fn format_g10(x: f64) -> String {
    const DIGITS: i32 = 10;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: String,
    /// Ordered `key: value` preamble entries, excluding kind and version.
    pub metadata: Vec<(String, String)>,
    /// Resolved configuration in TOML.
    pub config: Option<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(kind: &str, columns: &[&str]) -> Self {
        Table {
            kind: kind.to_string(),
            metadata: Vec::new(),
            config: None,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with_config(mut self, toml: String) -> Self {
        self.config = Some(toml);
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column; text cells become NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[j] {
                    Value::Num(x) => *x,
                    Value::Int(i) => *i as f64,
                    Value::Text(s) => s.parse().unwrap_or(f64::NAN),
                })
                .collect(),
        )
    }

    pub fn to_text(&self) -> Result<String, CliError> {
        let mut out = Vec::new();
        self.write(&mut out)?;
        String::from_utf8(out).map_err(|e| CliError::Numerical(e.to_string()))
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Io(e.to_string());
        writeln!(w, "# olg-table: {}", self.kind).map_err(io)?;
        writeln!(w, "# version: {VERSION}").map_err(io)?;
        for (k, v) in &self.metadata {
            writeln!(w, "# {k}: {v}").map_err(io)?;
        }
        if let Some(cfg) = &self.config {
            writeln!(w, "# config-begin").map_err(io)?;
            for line in cfg.lines() {
                if line.is_empty() {
                    writeln!(w, "#").map_err(io)?;
                } else {
                    writeln!(w, "# {line}").map_err(io)?;
                }
            }
            writeln!(w, "# config-end").map_err(io)?;
        }
        let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        csv.write_record(&self.columns).map_err(|e| CliError::Io(e.to_string()))?;
        for row in &self.rows {
            csv.write_record(row.iter().map(Value::render))
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        csv.flush().map_err(io)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = self.to_text()?;
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    /// Parses the format written by [`Table::write`]. Cells that parse as
    /// numbers become [`Value::Num`].
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |line: usize, msg: &str| CliError::Format {
            line,
            message: msg.to_string(),
        };
        let mut kind = None;
        let mut metadata = Vec::new();
        let mut config: Option<String> = None;
        let mut in_config = false;
        let mut body_start = 0;
        let mut body_line = 1;
        for (i, line) in text.split_inclusive('\n').enumerate() {
            let trimmed = line.trim_end_matches(['\n', '\r']);
            let Some(rest) = trimmed.strip_prefix('#') else {
                body_line = i + 1;
                break;
            };
            body_start += line.len();
            body_line = i + 2;
            let rest = rest.strip_prefix(' ').unwrap_or(rest);
            if in_config {
                if rest == "config-end" {
                    in_config = false;
                } else {
                    let cfg = config.get_or_insert_with(String::new);
                    cfg.push_str(rest);
                    cfg.push('\n');
                }
                continue;
            }
            if rest == "config-begin" {
                in_config = true;
                config = Some(String::new());
                continue;
            }
            let (k, v) = rest.split_once(": ").ok_or_else(|| bad(i + 1, "preamble line is not 'key: value'"))?;
            match k {
                "olg-table" => kind = Some(v.to_string()),
                "version" => {}
                _ => metadata.push((k.to_string(), v.to_string())),
            }
        }
        if in_config {
            return Err(bad(body_line, "unterminated config block"));
        }
        let kind = kind.ok_or_else(|| bad(1, "missing 'olg-table' preamble entry"))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(&text.as_bytes()[body_start..]);
        let columns: Vec<String> = reader
            .headers()
            .map_err(|e| bad(body_line, &e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize + body_line - 1).unwrap_or(body_line);
                bad(line, &e.to_string())
            })?;
            rows.push(
                record
                    .iter()
                    .map(|cell| match cell.parse::<f64>() {
                        Ok(x) => Value::Num(x),
                        Err(_) => Value::Text(cell.to_string()),
                    })
                    .collect(),
            );
        }
        Ok(Table {
            kind,
            metadata,
            config,
            columns,
            rows,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }
}

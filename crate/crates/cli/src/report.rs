use std::fmt::Write;

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    /// 0-based index; shown 1-based in tables.
    Index(usize),
    Bool(bool),
    Text(String),
    Floats(Vec<f64>),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as u64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_owned())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

impl From<Vec<f64>> for Value {
    fn from(x: Vec<f64>) -> Self {
        Value::Floats(x)
    }
}

/// Named scalars followed by an optional table.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub scalars: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            ..Self::default()
        }
    }

    pub fn scalar(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.scalars.push((key.into(), value.into()));
        self
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.columns = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn row(&mut self, values: Vec<Value>) -> &mut Self {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table(),
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.command);
        let width = self.scalars.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.scalars {
            let _ = writeln!(out, "  {k:<width$}  {}", human(v));
        }
        if self.columns.is_empty() {
            return out;
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(human).collect()).collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| cells.iter().map(|r| r[j].chars().count()).chain([c.len()]).max().unwrap_or(0))
            .collect();
        out.push('\n');
        let line = |fields: Vec<&str>| {
            let padded: Vec<String> = fields
                .iter()
                .zip(&widths)
                .map(|(f, &w)| format!("{f:>w$}"))
                .collect();
            format!("  {}\n", padded.join("  "))
        };
        out.push_str(&line(self.columns.iter().map(String::as_str).collect()));
        for r in &cells {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
        }
        out
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command={}", self.command);
        for (k, v) in &self.scalars {
            let _ = writeln!(out, "# {k}={}", machine(v, ";"));
        }
        if !self.columns.is_empty() {
            let _ = writeln!(out, "{}", self.columns.join(","));
            for r in &self.rows {
                let fields: Vec<String> = r.iter().map(|v| machine(v, ";")).collect();
                let _ = writeln!(out, "{}", fields.join(","));
            }
        }
        out
    }

    fn json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = write!(out, "  \"command\": {}", json_string(&self.command));
        for (k, v) in &self.scalars {
            let _ = write!(out, ",\n  {}: {}", json_string(k), json_value(v));
        }
        if !self.columns.is_empty() {
            out.push_str(",\n  \"rows\": [");
            for (i, r) in self.rows.iter().enumerate() {
                let fields: Vec<String> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| format!("{}: {}", json_string(c), json_value(v)))
                    .collect();
                let sep = if i == 0 { "" } else { "," };
                let _ = write!(out, "{sep}\n    {{{}}}", fields.join(", "));
            }
            out.push_str("\n  ]");
        }
        out.push_str("\n}\n");
        out
    }
}

/// 17 significant digits; non-finite values become `null`.
fn float17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn machine(v: &Value, list_sep: &str) -> String {
    match v {
        Value::Float(x) => float17(*x),
        Value::Int(n) => n.to_string(),
        Value::Index(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => s.clone(),
        Value::Floats(xs) => xs.iter().map(|&x| float17(x)).collect::<Vec<_>>().join(list_sep),
    }
}

fn json_string(s: &str) -> String {
    serde_json::Value::from(s).to_string()
}

fn json_value(v: &Value) -> String {
    match v {
        Value::Text(s) => json_string(s),
        Value::Floats(_) => format!("[{}]", machine(v, ", ")),
        other => machine(other, ", "),
    }
}

fn human_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if a == 0.0 || (1e-4..1e7).contains(&a) {
        let s = format!("{x:.12}");
        let s = s.trim_end_matches('0');
        s.strip_suffix('.').unwrap_or(s).to_owned()
    } else {
        format!("{x:.6e}")
    }
}

fn human(v: &Value) -> String {
    match v {
        Value::Float(x) => human_float(*x),
        Value::Index(i) => (i + 1).to_string(),
        Value::Floats(xs) => xs.iter().map(|&x| human_float(x)).collect::<Vec<_>>().join(" "),
        other => machine(other, " "),
    }
}

//! Run reports and CSV output.
//!
//! Reports are written as JSON with object keys sorted, floats printed in
//! `{:.16e}` form (17 significant digits) and non-finite floats as `null`,
//! so the same inputs always produce the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use dyonlab_core::checks::{CheckOutcome, Provenance};
use serde::Serialize;
use serde_json::{Map, Number, Value};

pub const VERSION: &str = concat!("dyonlab ", env!("CARGO_PKG_VERSION"));

/// One reported number with the tolerance it is trusted to and where it came from.
#[derive(Debug, Clone, Serialize)]
struct Quantity {
    value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    provenance: Provenance,
}

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: String,
    passed: bool,
    worst: f64,
    tolerance: f64,
    provenance: Provenance,
    #[serde(skip_serializing_if = "String::is_empty")]
    detail: String,
}

#[derive(Debug)]
pub struct Report {
    command: &'static str,
    seed: u64,
    inputs: Value,
    results: BTreeMap<String, Quantity>,
    data: BTreeMap<String, Value>,
    checks: Vec<Check>,
    wall_time: Option<f64>,
}

impl Report {
    pub fn new(command: &'static str, seed: u64, inputs: impl Serialize) -> Self {
        Self {
            command,
            seed,
            inputs: to_value(inputs),
            results: BTreeMap::new(),
            data: BTreeMap::new(),
            checks: Vec::new(),
            wall_time: None,
        }
    }

    pub fn result(
        &mut self,
        name: &str,
        value: impl Serialize,
        tolerance: Option<f64>,
        provenance: Provenance,
    ) {
        self.results.insert(
            name.to_string(),
            Quantity {
                value: to_value(value),
                tolerance,
                provenance,
            },
        );
    }

    /// Auxiliary structured output that is not a single checked number.
    pub fn data(&mut self, name: &str, value: impl Serialize) {
        self.data.insert(name.to_string(), to_value(value));
    }

    pub fn check(
        &mut self,
        name: &str,
        worst: f64,
        tolerance: f64,
        provenance: Provenance,
        detail: String,
    ) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: worst <= tolerance,
            worst,
            tolerance,
            provenance,
            detail,
        });
    }

    pub fn outcome(&mut self, o: &CheckOutcome) {
        self.checks.push(Check {
            name: format!("{}/{}", o.suite, o.name),
            passed: o.passed,
            worst: o.worst,
            tolerance: o.tolerance,
            provenance: o.provenance,
            detail: o.detail.clone(),
        });
    }

    pub fn set_wall_time(&mut self, seconds: f64) {
        self.wall_time = Some(seconds);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &str)> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| (c.name.as_str(), c.detail.as_str()))
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::from(self.command));
        m.insert("version".into(), Value::from(VERSION));
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("inputs".into(), self.inputs.clone());
        m.insert("results".into(), to_value(&self.results));
        if !self.data.is_empty() {
            m.insert("data".into(), to_value(&self.data));
        }
        m.insert("checks".into(), to_value(&self.checks));
        m.insert("passed".into(), Value::from(self.passed()));
        if let Some(t) = self.wall_time {
            m.insert("wall_time_s".into(), to_value(t));
        }
        Value::Object(m)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        write_value(&mut out, &self.to_json(), 0);
        out.push('\n');
        out
    }

    /// Write to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> io::Result<()> {
        let text = self.render();
        match path {
            Some(p) => File::create(p)?.write_all(text.as_bytes()),
            None => io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}

fn to_value(v: impl Serialize) -> Value {
    // NaN and infinities become null
    serde_json::to_value(v).expect("report values are plain data")
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(out, indent + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[k], indent + 1);
            }
            out.push('\n');
            pad(out, indent);
            out.push('}');
        }
    }
}

fn write_number(out: &mut String, n: &Number) {
    if n.is_f64() {
        let x = n.as_f64().expect("checked f64");
        let _ = write!(out, "{x:.16e}");
    } else {
        let _ = write!(out, "{n}");
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Write rows under a header to a CSV file, floats in `{:.16e}` form.
pub fn write_csv<const N: usize>(
    path: &Path,
    header: [&str; N],
    rows: impl IntoIterator<Item = [f64; N]>,
) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| format!("{x:.16e}")))?;
    }
    w.flush()
}

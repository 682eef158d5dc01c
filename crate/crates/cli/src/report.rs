//! Report envelope shared by every command, and the plain-text renderer.
//!
//! Display tables are stored in the JSON with values already rounded to
//! their printed precision. The text report is produced from the parsed
//! JSON alone, so every number in it can be found in the JSON body.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL_NAME: &str = "appeval";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub file: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of_file(role: &str, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(InputDigest {
            role: role.to_string(),
            file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: String,
    /// Digits after the decimal point; `None` for text columns.
    pub decimals: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(title: &str, columns: &[(&str, Option<usize>)]) -> Self {
        Table {
            title: title.to_string(),
            columns: columns
                .iter()
                .map(|(n, d)| Column { name: n.to_string(), decimals: *d })
                .collect(),
            rows: Vec::new(),
        }
    }
}

/// A cell rounded to `decimals` places. Integers are stored as JSON integers.
pub fn num(x: f64, decimals: usize) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    if decimals == 0 {
        return Value::from(x.round() as i64);
    }
    let p = 10f64.powi(decimals as i32);
    let r = (x * p).round() / p;
    // avoid "-0.00"
    Value::from(if r == 0.0 { 0.0 } else { r })
}

pub fn text(s: impl Into<String>) -> Value {
    Value::String(s.into())
}

#[derive(Debug, Serialize)]
pub struct Report<P: Serialize, R: Serialize> {
    pub tool: Tool,
    pub command: &'static str,
    pub inputs: Vec<InputDigest>,
    pub parameters: P,
    pub results: R,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
}

impl<P: Serialize, R: Serialize> Report<P, R> {
    pub fn new(command: &'static str, inputs: Vec<InputDigest>, parameters: P, results: R) -> Self {
        Report {
            tool: Tool { name: TOOL_NAME, version: TOOL_VERSION },
            command,
            inputs,
            parameters,
            results,
            tables: Vec::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

fn cell(v: &Value, decimals: Option<usize>) -> String {
    match (v, decimals) {
        (Value::Null, _) => "-".to_string(),
        (Value::String(s), _) => s.clone(),
        (Value::Bool(b), _) => if *b { "yes" } else { "no" }.to_string(),
        (Value::Number(n), Some(d)) => match n.as_i64() {
            Some(i) if d == 0 => i.to_string(),
            _ => format!("{:.*}", d, n.as_f64().unwrap_or(f64::NAN)),
        },
        (other, _) => other.to_string(),
    }
}

/// Plain-text rendering of a report JSON document.
pub fn render_text(doc: &Value) -> String {
    let mut out = String::new();
    let tool = &doc["tool"];
    let _ = writeln!(
        out,
        "{} {} {}",
        tool["name"].as_str().unwrap_or(TOOL_NAME),
        tool["version"].as_str().unwrap_or(""),
        doc["command"].as_str().unwrap_or("")
    );
    for input in doc["inputs"].as_array().into_iter().flatten() {
        let _ = writeln!(
            out,
            "  {}: {} sha256:{}",
            input["role"].as_str().unwrap_or(""),
            input["file"].as_str().unwrap_or(""),
            input["sha256"].as_str().unwrap_or("")
        );
    }
    for table in doc["tables"].as_array().into_iter().flatten() {
        let columns: Vec<(&str, Option<usize>)> = table["columns"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|c| (c["name"].as_str().unwrap_or(""), c["decimals"].as_u64().map(|d| d as usize)))
            .collect();
        let rows: Vec<Vec<String>> = table["rows"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|r| {
                r.as_array()
                    .into_iter()
                    .flatten()
                    .zip(&columns)
                    .map(|(v, c)| cell(v, c.1))
                    .collect()
            })
            .collect();
        let mut widths: Vec<usize> = columns.iter().map(|c| c.0.chars().count()).collect();
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let _ = writeln!(out, "\n{}", table["title"].as_str().unwrap_or(""));
        let line = |cells: Vec<&str>, out: &mut String| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .zip(&columns)
                .map(|((c, w), col)| {
                    if col.1.is_some() {
                        format!("{c:>w$}")
                    } else {
                        format!("{c:<w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(columns.iter().map(|c| c.0).collect(), &mut out);
        let total: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        let _ = writeln!(out, "{}", "-".repeat(total));
        for r in &rows {
            line(r.iter().map(String::as_str).collect(), &mut out);
        }
    }
    let notes: Vec<&str> = doc["notes"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
    if !notes.is_empty() {
        out.push('\n');
        for n in notes {
            let _ = writeln!(out, "note: {n}");
        }
    }
    let warnings: Vec<&str> = doc["warnings"].as_array().into_iter().flatten().filter_map(Value::as_str).collect();
    if !warnings.is_empty() {
        out.push('\n');
        for w in warnings {
            let _ = writeln!(out, "warning: {w}");
        }
    }
    out
}

/// Write `<stem>_report.json` and `<stem>_report.txt` into `dir`; returns the text.
pub fn emit<P: Serialize, R: Serialize>(report: &Report<P, R>, stem: &str, dir: Option<&Path>) -> Result<String> {
    let json = report.to_json()?;
    let doc: Value = serde_json::from_str(&json)?;
    let txt = render_text(&doc);
    if let Some(dir) = dir {
        write_file(&dir.join(format!("{stem}_report.json")), &json)?;
        write_file(&dir.join(format!("{stem}_report.txt")), &txt)?;
    }
    Ok(txt)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

//! Text and JSON rendering. Every JSON document starts with `"schema": 1`;
//! keys keep insertion order, so output is byte-stable.

use qsym::logsymbol::LogField;
use qsym::{LaurentField, Symbol};
use serde_json::{json, Map, Value};

pub const SCHEMA: u64 = 1;

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum Mode {
    Text,
    Json,
}

/// The result of one command in both renderings.
#[derive(Clone, Debug)]
pub struct Rendered {
    pub text: String,
    pub json: Value,
}

impl Rendered {
    pub fn new(text: impl Into<String>, json: Value) -> Self {
        Rendered { text: text.into(), json }
    }

    /// The document for `mode`, newline-terminated.
    pub fn render(&self, command: &str, mode: Mode) -> String {
        match mode {
            Mode::Text => {
                let mut s = self.text.clone();
                if !s.ends_with('\n') {
                    s.push('\n');
                }
                s
            }
            Mode::Json => {
                let mut doc = Map::new();
                doc.insert("schema".into(), json!(SCHEMA));
                doc.insert("command".into(), json!(command));
                doc.insert("result".into(), self.json.clone());
                let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

pub fn symbol_json(s: &Symbol<LaurentField>) -> Value {
    let terms: Vec<Value> = s.terms().rev().map(|(k, c)| json!({"order": k, "coefficient": c.to_string()})).collect();
    json!({
        "basis": s.basis().to_string(),
        "floor": s.floor(),
        "text": s.to_text(),
        "terms": terms,
    })
}

pub fn log_symbol_json(s: &Symbol<LogField>) -> Value {
    let terms: Vec<Value> = s.terms().rev().map(|(k, c)| json!({"order": k, "coefficient": c.to_string()})).collect();
    json!({
        "basis": s.basis().to_string(),
        "floor": s.floor(),
        "text": format!("basis={} floor={} : {}", s.basis(), s.floor(), s),
        "terms": terms,
    })
}

pub fn log_symbol_text(s: &Symbol<LogField>) -> String {
    format!("basis={} floor={} : {}", s.basis(), s.floor(), s)
}

//! Ordered reports rendered as `key: value` text or JSON.

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

pub struct Report {
    fields: Map<String, Value>,
    /// Multi-line artifacts (code files, DOT) echoed after the fields.
    blocks: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), Value::from(command));
        Report {
            fields,
            blocks: Vec::new(),
        }
    }

    pub fn field(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.fields.insert(key.into(), v);
        self
    }

    pub fn block(&mut self, name: &str, text: String) -> &mut Self {
        self.blocks.push((name.into(), text));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut all = self.fields.clone();
                for (name, text) in &self.blocks {
                    all.insert(name.clone(), Value::from(text.as_str()));
                }
                let mut out = serde_json::to_string_pretty(&Value::Object(all)).expect("json");
                out.push('\n');
                out
            }
            Format::Text => {
                let mut out = String::new();
                for (k, v) in &self.fields {
                    out.push_str(k);
                    out.push_str(": ");
                    out.push_str(&plain(v));
                    out.push('\n');
                }
                for (name, text) in &self.blocks {
                    out.push_str(&format!("\n[{name}]\n{text}"));
                    if !text.ends_with('\n') {
                        out.push('\n');
                    }
                }
                out
            }
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::Null => "none".into(),
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            items.iter().map(plain).collect::<Vec<_>>().join(", ")
        }
        other => other.to_string(),
    }
}

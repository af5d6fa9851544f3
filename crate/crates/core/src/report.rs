//! Key -> (value, unit) report documents.
//!
//! A [`Report`] keeps insertion order so that every rendering is
//! byte-stable for identical inputs.

use serde_json::{json, Map, Value};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub entries: Vec<Entry>,
    /// Non-fatal warnings raised while deriving the values.
    pub flags: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            ..Default::default()
        }
    }

    /// Appends an entry, replacing any earlier entry with the same key.
    pub fn push(&mut self, key: &str, value: f64, unit: &str) {
        if let Some(e) = self.entries.iter_mut().find(|e| e.key == key) {
            e.value = value;
            e.unit = unit.to_string();
            return;
        }
        self.entries.push(Entry {
            key: key.to_string(),
            value,
            unit: unit.to_string(),
        });
    }

    pub fn flag(&mut self, message: impl Into<String>) {
        self.flags.push(message.into());
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.key == key).map(|e| e.value)
    }

    pub fn extend(&mut self, other: &Report) {
        for e in &other.entries {
            self.push(&e.key, e.value, &e.unit);
        }
        self.flags.extend(other.flags.iter().cloned());
    }

    /// Flat `key = value unit` lines; flags become `# flag:` comments.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            if e.unit.is_empty() {
                let _ = writeln!(out, "{} = {:e}", e.key, e.value);
            } else {
                let _ = writeln!(out, "{} = {:e} {}", e.key, e.value, e.unit);
            }
        }
        for f in &self.flags {
            let _ = writeln!(out, "# flag: {f}");
        }
        out
    }

    pub fn to_json_value(&self) -> Value {
        let mut values = Map::new();
        for e in &self.entries {
            values.insert(e.key.clone(), json!({ "value": e.value, "unit": e.unit }));
        }
        json!({
            "report": self.title,
            "values": Value::Object(values),
            "flags": self.flags,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value())
            .expect("report values are always serializable");
        s.push('\n');
        s
    }

    /// Human-readable aligned table.
    pub fn to_table(&self) -> String {
        let kw = self.entries.iter().map(|e| e.key.len()).max().unwrap_or(3).max(3);
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        for e in &self.entries {
            let _ = writeln!(out, "  {:<kw$}  {:>14.6e}  {}", e.key, e.value, e.unit);
        }
        for f in &self.flags {
            let _ = writeln!(out, "  warning: {f}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_replaces_existing_key() {
        let mut r = Report::new("t");
        r.push("a", 1.0, "m");
        r.push("b", 2.0, "s");
        r.push("a", 3.0, "m");
        assert_eq!(r.entries.len(), 2);
        assert_eq!(r.get("a"), Some(3.0));
    }

    #[test]
    fn text_uses_round_trip_float_format() {
        let mut r = Report::new("t");
        r.push("nu_c", 76336.0734, "Hz");
        r.push("ratio", 0.1, "");
        let text = r.to_text();
        assert_eq!(text, "nu_c = 7.63360734e4 Hz\nratio = 1e-1\n");
        let v: f64 = "7.63360734e4".parse().unwrap();
        assert_eq!(v, 76336.0734);
    }

    #[test]
    fn json_keeps_insertion_order() {
        let mut r = Report::new("t");
        r.push("z", 1.0, "m");
        r.push("a", 2.0, "s");
        let s = r.to_json();
        assert!(s.find("\"z\"").unwrap() < s.find("\"a\"").unwrap());
    }
}

//! Flat key/value reports rendered as JSON, CSV or an aligned table.

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    fields: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    /// Non-finite numbers become `null`.
    pub fn number(self, key: &str, x: f64) -> Self {
        let v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        self.with(key, v)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Table => self.table(),
        }
    }

    fn json(&self) -> String {
        let mut out = String::from("{\n");
        for (i, (k, v)) in self.fields.iter().enumerate() {
            let sep = if i + 1 == self.fields.len() { "" } else { "," };
            out.push_str(&format!("  {}: {}{sep}\n", Value::String(k.clone()), v));
        }
        out.push_str("}\n");
        out
    }

    fn csv(&self) -> String {
        let keys: Vec<&str> = self.fields.iter().map(|(k, _)| k.as_str()).collect();
        let values: Vec<String> = self.fields.iter().map(|(_, v)| csv_cell(v)).collect();
        format!("{}\n{}\n", keys.join(","), values.join(","))
    }

    fn table(&self) -> String {
        let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        self.fields
            .iter()
            .map(|(k, v)| format!("{k:<width$}  {}\n", plain(v)))
            .collect()
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        other => plain(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report::new()
            .with("name", "deployed")
            .number("squeezing_db", -0.5)
            .number("thd_dbc", f64::NEG_INFINITY)
    }

    #[test]
    fn json_keeps_field_order() {
        assert_eq!(
            sample().render(Format::Json),
            "{\n  \"name\": \"deployed\",\n  \"squeezing_db\": -0.5,\n  \"thd_dbc\": null\n}\n"
        );
    }

    #[test]
    fn csv_and_table() {
        assert_eq!(
            sample().render(Format::Csv),
            "name,squeezing_db,thd_dbc\ndeployed,-0.5,\n"
        );
        assert_eq!(
            sample().render(Format::Table),
            "name          deployed\nsqueezing_db  -0.5\nthd_dbc       -\n"
        );
    }
}

//! Run reports: a versioned JSON envelope plus a flat CSV trace for
//! plotting. Serialization is deterministic for a fixed command and seed —
//! only the duration field varies between runs.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub results: Value,
    pub violations: Vec<Value>,
    pub duration_ms: f64,
}

impl RunReport {
    pub fn new(command: &str, config: Value, seed: u64) -> Self {
        RunReport {
            schema: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            seed,
            results: Value::Null,
            violations: Vec::new(),
            duration_ms: 0.0,
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.violations.is_empty() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

pub fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("value serialization")
}

/// One CSV table: a header and stringified rows.
#[derive(Debug, Default)]
pub struct CsvTrace {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTrace {
    pub fn new(header: &[&str]) -> Self {
        CsvTrace {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Render a float with enough digits to round-trip, without locale noise.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_serializes_in_declaration_order() {
        let mut r = RunReport::new("classify", serde_json::json!({"weights": "constant:2"}), 7);
        r.results = serde_json::json!({"verdict": "B"});
        let text = r.to_json();
        let schema_at = text.find("\"schema\"").unwrap();
        let command_at = text.find("\"command\"").unwrap();
        let results_at = text.find("\"results\"").unwrap();
        let duration_at = text.find("\"duration_ms\"").unwrap();
        assert!(schema_at < command_at && command_at < results_at && results_at < duration_at);
        assert_eq!(r.exit_code(), 0);
        r.violations.push(serde_json::json!({"kind": "planted"}));
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn csv_rows_join_flat() {
        let mut t = CsvTrace::new(&["a", "b"]);
        t.push(vec!["1".into(), num(0.5)]);
        assert_eq!(t.header.join(","), "a,b");
        assert_eq!(t.rows[0].join(","), "1,0.5");
    }
}

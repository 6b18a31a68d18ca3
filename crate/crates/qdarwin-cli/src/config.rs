//! Config file loading and flag overlay.
//!
//! The config is TOML with a `[run]` section for global settings and one section per
//! subcommand. Flags given on the command line replace the corresponding keys.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Failure;

#[derive(Debug, Default)]
pub struct ConfigFile {
    pub run: Map<String, Value>,
    sections: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Failure::Config(msg) => Failure::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))?;
        let Value::Object(mut sections) = serde_json::to_value(table)? else {
            unreachable!("a TOML document is a table")
        };
        let run = match sections.remove("run") {
            Some(Value::Object(m)) => m,
            Some(_) => return Err(Failure::Config("[run] must be a table".into())),
            None => Map::new(),
        };
        Ok(Self { run, sections })
    }

    pub fn section(&self, name: &str) -> Result<Map<String, Value>, Failure> {
        match self.sections.get(name) {
            Some(Value::Object(m)) => Ok(m.clone()),
            Some(_) => Err(Failure::Config(format!("[{name}] must be a table"))),
            None => Ok(Map::new()),
        }
    }

    /// Sections other than `[run]` that do not name a subcommand.
    pub fn unknown_sections(&self, known: &[&str]) -> Vec<String> {
        self.sections.keys().filter(|k| !known.contains(&k.as_str())).cloned().collect()
    }
}

/// Overlays the non-null fields of `flags` on `base` and deserializes the result.
pub fn merge<T: Serialize + DeserializeOwned>(section: &str, base: Map<String, Value>, flags: &T) -> Result<T, Failure> {
    let mut merged = base;
    if let Value::Object(f) = serde_json::to_value(flags)? {
        for (k, v) in f {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Failure::Config(format!("[{section}]: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Demo {
        n: Option<usize>,
        time: Option<f64>,
    }

    #[test]
    fn flags_win() {
        let cfg = ConfigFile::parse("[run]\nseed = 3\n[demo]\nn = 10\ntime = 2.5\n").unwrap();
        assert_eq!(cfg.run["seed"], 3);
        let d: Demo = merge("demo", cfg.section("demo").unwrap(), &Demo { n: Some(7), time: None }).unwrap();
        assert_eq!(d, Demo { n: Some(7), time: Some(2.5) });
    }

    #[test]
    fn unknown_key_is_reported() {
        let cfg = ConfigFile::parse("[demo]\nnn = 10\n").unwrap();
        let err = merge::<Demo>("demo", cfg.section("demo").unwrap(), &Demo::default()).unwrap_err();
        assert!(matches!(err, Failure::Config(m) if m.contains("nn")));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = ConfigFile::parse("[demo]\nn = = 1\n").unwrap_err();
        assert!(matches!(err, Failure::Config(m) if m.contains("line 2")));
    }
}

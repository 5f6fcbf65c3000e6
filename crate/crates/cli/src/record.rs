//! Run records and output-directory bookkeeping.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use dbarlab::io::SCHEMA_VERSION;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Hex SHA-256 of the compact JSON form of `config`.
pub fn config_digest<T: Serialize>(config: &T) -> Result<String> {
    let text = serde_json::to_string(config)?;
    Ok(format!("{:x}", Sha256::digest(text.as_bytes())))
}

#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub command: String,
    pub config: Value,
    pub config_digest: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
    pub summary: Value,
}

/// Timestamp-free part of a run, byte-stable across identical runs.
#[derive(Debug, Serialize)]
struct Summary<'a> {
    schema_version: u32,
    command: &'a str,
    config_digest: &'a str,
    summary: &'a Value,
}

/// Collects the files of one run under its output directory.
pub struct Run {
    dir: PathBuf,
    command: String,
    config: Value,
    digest: String,
    started: String,
    outputs: Vec<String>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl Run {
    pub fn start<T: Serialize>(dir: &Path, command: &str, config: &T) -> Result<Self> {
        Ok(Run {
            dir: dir.to_path_buf(),
            command: command.into(),
            config: serde_json::to_value(config)?,
            digest: config_digest(config)?,
            started: now(),
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.into());
        Ok(())
    }

    /// Writes `value` with a `schema_version` field; non-object values are
    /// nested under `data`.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let doc = match serde_json::to_value(value)? {
            Value::Object(mut m) => {
                m.insert("schema_version".into(), SCHEMA_VERSION.into());
                Value::Object(m)
            }
            other => serde_json::json!({ "schema_version": SCHEMA_VERSION, "data": other }),
        };
        self.write(name, dbarlab::io::to_json(&doc)?.as_bytes())
    }

    /// Writes `summary.json` and `run.json` and returns the record.
    pub fn finish(mut self, summary: Value) -> Result<RunRecord> {
        let s = Summary {
            schema_version: SCHEMA_VERSION,
            command: &self.command,
            config_digest: &self.digest,
            summary: &summary,
        };
        let text = dbarlab::io::to_json(&s)?;
        self.write("summary.json", text.as_bytes())?;
        self.outputs.push("run.json".into());
        let record = RunRecord {
            schema_version: SCHEMA_VERSION,
            command: self.command,
            config: self.config,
            config_digest: self.digest,
            started: self.started,
            finished: now(),
            outputs: self.outputs,
            summary,
        };
        let text = dbarlab::io::to_json(&record)?;
        let path = self.dir.join("run.json");
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = config_digest(&serde_json::json!({"x": 1.0})).unwrap();
        assert_eq!(a, config_digest(&serde_json::json!({"x": 1.0})).unwrap());
        assert_ne!(a, config_digest(&serde_json::json!({"x": 2.0})).unwrap());
        assert_eq!(a.len(), 64);
    }
}

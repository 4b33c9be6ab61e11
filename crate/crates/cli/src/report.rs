//! Machine-readable run reports and output plumbing.
//!
//! Every seeded or file-producing command can emit a `RunReport`: a JSON
//! object whose `command`, `inputs` and `seed` fields are sufficient to
//! re-run the command bit-identically (the only field that varies between
//! identical runs is `timing_ms`).  Exact rationals are rendered as
//! `"numerator/denominator"` strings; decimals appear only as companion
//! `*_decimal` annotations rounded to four places.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

use kplanar::probability::render_4dp;
use kplanar::Rational;

use crate::CliError;

/// Report of one command run; serialized as stable-order JSON.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Map<String, Value>,
    pub timing_ms: u64,
}

impl RunReport {
    pub fn new(command: &str) -> RunReport {
        RunReport {
            command: command.to_string(),
            inputs: Map::new(),
            seed: None,
            outputs: Map::new(),
            timing_ms: 0,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) {
        self.inputs.insert(key.to_string(), value.into());
    }

    pub fn output(&mut self, key: &str, value: impl Into<Value>) {
        self.outputs.insert(key.to_string(), value.into());
    }

    /// Insert an exact rational under `key` plus a `key_decimal` annotation.
    pub fn output_rational(&mut self, key: &str, value: &Rational) {
        self.outputs.insert(key.to_string(), Value::String(rational_str(value)));
        self.outputs.insert(format!("{key}_decimal"), Value::String(render_4dp(value)));
    }

    pub fn stamp(&mut self, started: Instant) {
        self.timing_ms = started.elapsed().as_millis() as u64;
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Exact rational as text: `p/q`, or just `p` when the value is integral.
pub fn rational_str(r: &Rational) -> String {
    r.to_string()
}

/// Normalized edge as `u,v` text.
pub fn edge_str((u, v): (u32, u32)) -> String {
    format!("{u},{v}")
}

/// Write `content` to `--out` when given, stdout otherwise.
pub fn deliver(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, content),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Validation(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

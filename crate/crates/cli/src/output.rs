use std::fs;
use std::io::Write;
use std::path::Path;

use carnot_core::report::{emit_csv, to_value, Format, Tabular};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// SHA-256 over the canonical JSON of the command and its parameters.
/// The output path is not part of the configuration.
pub fn config_hash(command: &str, config: &Value) -> String {
    let canonical = json!([command, config]).to_string();
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

pub struct Meta<'a> {
    pub command: &'a str,
    pub config: Value,
    pub seed: u64,
}

pub fn render<T: Tabular>(meta: &Meta<'_>, report: &T, format: Format) -> Result<String, CliError> {
    let hash = config_hash(meta.command, &meta.config);
    match format {
        Format::Json => {
            let envelope = json!({
                "command": meta.command,
                "config_hash": hash,
                "seed": meta.seed,
                "config": meta.config,
                "report": to_value(report)?,
            });
            Ok(serde_json::to_string_pretty(&envelope).expect("json values serialize") + "\n")
        }
        Format::Csv => {
            let mut s = emit_csv(report)?;
            s.push_str(&format!("# command={} config={hash} seed={}\n", meta.command, meta.seed));
            Ok(s)
        }
    }
}

pub fn write(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

pub fn config_value<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

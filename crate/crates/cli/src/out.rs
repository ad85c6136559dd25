//! Output plumbing. Data bodies go to stdout or `--out`; metadata (seed,
//! parameters, tool version, aggregation choices) is embedded in the body
//! itself — as `#` comment lines for CSV, as the first record for JSONL —
//! and contains no timestamps, so identical configs reproduce identical
//! bytes. CSV files written to disk also get a `.meta.json` sidecar.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn meta_value(command: &str, seed: u64, params: Value, aggregation: Value) -> Value {
    json!({
        "tool": "percolo",
        "version": VERSION,
        "command": command,
        "seed": seed,
        "params": params,
        "aggregation": aggregation,
    })
}

/// `#`-prefixed header encoding the metadata (one JSON doc per line).
pub fn csv_meta_header(meta: &Value) -> String {
    let mut s = String::new();
    s.push_str(&format!("# percolo {} {}\n", VERSION, meta["command"].as_str().unwrap_or("?")));
    s.push_str(&format!("# seed: {}\n", meta["seed"]));
    s.push_str(&format!("# params: {}\n", meta["params"]));
    s.push_str(&format!("# aggregation: {}\n", meta["aggregation"]));
    s
}

pub fn write_body(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

/// Pretty JSON next to a CSV body (skipped when writing to stdout).
pub fn write_sidecar(out: Option<&Path>, meta: &Value) -> Result<(), CliError> {
    if let Some(path) = out {
        let mut name = path.as_os_str().to_owned();
        name.push(".meta.json");
        std::fs::write(name, format!("{meta:#}\n"))?;
    }
    Ok(())
}

//! JSON config files with flag overrides, and the output plumbing shared by
//! every subcommand.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub const VERSION: &str = env!("HLPUSH_VERSION");

/// An invalid configuration; reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Fields missing from both the file and the flags get their default here.
pub trait Resolve: Serialize + DeserializeOwned {
    fn fill_defaults(&mut self);
}

/// Overlays `flags` on the JSON object in `file` (flags win), then fills in
/// defaults. Unknown keys in the file are rejected by the target type.
pub fn resolve<T: Resolve>(file: Option<&Path>, flags: &T) -> anyhow::Result<T> {
    let mut merged = match file {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            match serde_json::from_str::<Value>(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))? {
                Value::Object(m) => m,
                _ => return Err(usage(format!("config {} must hold a JSON object", path.display()))),
            }
        }
        None => Map::new(),
    };
    if let Value::Object(over) = serde_json::to_value(flags)? {
        for (k, v) in over {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    let mut cfg: T = serde_json::from_value(Value::Object(merged)).map_err(|e| usage(format!("config: {e}")))?;
    cfg.fill_defaults();
    Ok(cfg)
}

pub fn require<T: Copy>(value: Option<T>, name: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| usage(format!("missing required field `{name}`")))
}

/// Checks a numeric precondition and names the offending field.
pub fn check(ok: bool, name: &str, value: impl std::fmt::Display, domain: &str) -> anyhow::Result<()> {
    if ok {
        Ok(())
    } else {
        Err(usage(format!("field `{name}` = {value} must be {domain}")))
    }
}

pub fn output_path(out_dir: &Path, name: Option<&str>, default: &str) -> anyhow::Result<PathBuf> {
    let path = out_dir.join(name.unwrap_or(default));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(path)
}

/// `# hlpush <version>` and `# config <json>` lines heading every CSV.
pub fn csv_preamble<W: Write, C: Serialize>(mut w: W, command: &str, config: &C) -> anyhow::Result<()> {
    writeln!(w, "# hlpush {VERSION}")?;
    writeln!(w, "# command {command}")?;
    writeln!(w, "# config {}", serde_json::to_string(config)?)?;
    Ok(())
}

/// Writes `{version, command, config, pass, report}` as pretty JSON.
pub fn write_report<C: Serialize, R: Serialize>(
    path: &Path,
    command: &str,
    config: &C,
    pass: bool,
    report: &R,
) -> anyhow::Result<()> {
    let doc = serde_json::json!({
        "version": VERSION,
        "command": command,
        "config": config,
        "pass": pass,
        "report": report,
    });
    fs::write(path, serde_json::to_string_pretty(&doc)? + "\n").with_context(|| format!("writing {}", path.display()))
}

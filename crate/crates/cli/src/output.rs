use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use chaoslab_core::TOOL_VERSION;

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn to_json_bytes(v: &Value) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Writes JSON to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, v: &Value) -> Result<()> {
    let bytes = to_json_bytes(v)?;
    match out {
        Some(p) => write_atomic(p, &bytes),
        None => {
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

/// `{tool_version, command, parameters, result}`.
pub fn envelope(command: &str, parameters: Value, result: Value) -> Value {
    json!({
        "tool_version": TOOL_VERSION,
        "command": command,
        "parameters": parameters,
        "result": result,
    })
}

/// Adds `command` and `parameters` to an artifact that already is an object.
pub fn stamp(mut artifact: Value, command: &str, parameters: Value) -> Value {
    if let Value::Object(m) = &mut artifact {
        m.insert("command".into(), Value::String(command.into()));
        m.insert("parameters".into(), parameters);
        m.entry("tool_version")
            .or_insert_with(|| Value::String(TOOL_VERSION.into()));
    }
    artifact
}

//! Reading JSON inputs with JSON-pointer error locations.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::{CliError, CliResult};

fn schema(path: &Path, pointer: impl Into<String>, message: impl ToString) -> CliError {
    CliError::Schema { path: path.to_path_buf(), pointer: pointer.into(), message: message.to_string() }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        use serde_path_to_error::Segment;
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn read_value(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| schema(path, format!("line {} column {}", e.line(), e.column()), e))
}

fn decode<T: DeserializeOwned>(path: &Path, value: Value, prefix: &str) -> CliResult<T> {
    serde_path_to_error::deserialize(value)
        .map_err(|e| schema(path, format!("{prefix}{}", pointer_of(e.path()).trim_end_matches('/')), e.inner()))
}

/// Parses `path` as `T`.
pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    decode(path, read_value(path)?, "")
}

/// Parses `path` as `T`, or as the `key` member of a wrapping object such as
/// a generated hardness instance.
pub fn load_nested<T: DeserializeOwned>(path: &Path, key: &str, marker: &str) -> CliResult<T> {
    let value = read_value(path)?;
    match value {
        Value::Object(mut map) if !map.contains_key(marker) && map.contains_key(key) => {
            let inner = map.remove(key).expect("checked");
            decode(path, inner, &format!("/{key}"))
        }
        other => decode(path, other, ""),
    }
}

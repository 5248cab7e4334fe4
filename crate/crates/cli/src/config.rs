//! Loading JSON configs: files or stdin, dotted `--set` overrides, and
//! fields given as paths to other JSON files.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::CliError;

/// Keys whose value may be a path to a JSON file instead of inline JSON.
const FILE_KEYS: &[&str] = &[
    "tensor",
    "series",
    "model",
    "hypergraph",
    "family",
    "variance",
    "profile",
    "solver",
    "geometry",
    "identities",
];

pub struct Loaded {
    pub value: Value,
    base: Option<PathBuf>,
}

/// Reads `path` (`-` for stdin), or starts from `{}` when no path is given.
pub fn load(path: Option<&str>) -> Result<Loaded, CliError> {
    let (text, base) = match path {
        None => return Ok(Loaded { value: Value::Object(Map::new()), base: None }),
        Some("-") => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Input(format!("reading stdin: {e}")))?;
            (s, None)
        }
        Some(p) => {
            let s = fs::read_to_string(p).map_err(|e| CliError::Input(format!("reading {p}: {e}")))?;
            (s, Path::new(p).parent().map(Path::to_path_buf))
        }
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("config is not valid JSON: {e}")))?;
    if !value.is_object() {
        return Err(CliError::Input("config must be a JSON object".into()));
    }
    Ok(Loaded { value, base })
}

impl Loaded {
    /// Applies `key.path=value` overrides. Values are parsed as JSON when
    /// possible and taken as strings otherwise.
    pub fn apply_overrides(&mut self, sets: &[String]) -> Result<(), CliError> {
        for s in sets {
            let (key, raw) = s
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("override {s:?} is not of the form key=value")))?;
            let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut self.value, key, parsed)?;
        }
        Ok(())
    }

    /// Replaces string values of [`FILE_KEYS`] by the JSON they point to.
    pub fn resolve_files(&mut self) -> Result<(), CliError> {
        let base = self.base.clone();
        resolve(&mut self.value, base.as_deref(), 0)
    }

    pub fn parse<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        serde_json::from_value(self.value.clone()).map_err(|e| CliError::Lib(e.into()))
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Input(format!("bad override key {key:?}")));
    }
    let mut cur = root;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| CliError::Input(format!("{key:?}: {part:?} is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::Input(format!("{key:?}: index {idx} out of range (length {len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                let slot = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
                if slot.is_null() {
                    *slot = Value::Object(Map::new());
                }
                slot
            }
            _ => return Err(CliError::Input(format!("{key:?}: cannot descend into a scalar at {part:?}"))),
        };
    }
    Ok(())
}

fn resolve(v: &mut Value, base: Option<&Path>, depth: usize) -> Result<(), CliError> {
    if depth > 16 {
        return Err(CliError::Input("config file references nest too deeply".into()));
    }
    match v {
        Value::Object(map) => {
            for (k, field) in map.iter_mut() {
                if let Value::String(path) = field {
                    if FILE_KEYS.contains(&k.as_str()) {
                        let (loaded, next) = read_json(path, base)?;
                        *field = loaded;
                        resolve(field, next.as_deref(), depth + 1)?;
                        continue;
                    }
                }
                resolve(field, base, depth)?;
            }
        }
        Value::Array(items) => {
            for item in items {
                resolve(item, base, depth)?;
            }
        }
        _ => {}
    }
    Ok(())
}

/// Relative paths are tried next to the referring file, then in the
/// working directory.
fn read_json(path: &str, base: Option<&Path>) -> Result<(Value, Option<PathBuf>), CliError> {
    let direct = PathBuf::from(path);
    let candidate = match base {
        Some(b) if direct.is_relative() && b.join(&direct).exists() => b.join(&direct),
        _ => direct,
    };
    let text =
        fs::read_to_string(&candidate).map_err(|e| CliError::Input(format!("reading {}: {e}", candidate.display())))?;
    let value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{} is not valid JSON: {e}", candidate.display())))?;
    Ok((value, candidate.parent().map(Path::to_path_buf)))
}

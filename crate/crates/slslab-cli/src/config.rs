//! Parameter resolution: built-in defaults, then an optional `key = value`
//! config file, then command-line flags, later layers winning.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

/// Plain `key = value` lines; `#` starts a comment. Keys the command does not
/// know are an error, not a warning.
pub fn load_config_file(path: &Path, known: &[&str]) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected key=value, got `{raw}`",
                path.display(),
                idx + 1
            )));
        };
        let k = k.trim();
        if !known.contains(&k) {
            return Err(CliError::Usage(format!(
                "{}:{}: unknown key `{k}`",
                path.display(),
                idx + 1
            )));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Resolved parameter map for one command.
pub fn resolve(
    known: &[(&str, Option<&str>)],
    config: Option<&Path>,
    flags: &[(&str, Option<String>)],
) -> Result<BTreeMap<String, String>, CliError> {
    let keys: Vec<&str> = known.iter().map(|(k, _)| *k).collect();
    let mut map = BTreeMap::new();
    for (k, default) in known {
        if let Some(d) = default {
            map.insert(k.to_string(), d.to_string());
        }
    }
    if let Some(path) = config {
        map.extend(load_config_file(path, &keys)?);
    }
    for (k, v) in flags {
        debug_assert!(keys.contains(k), "flag `{k}` missing from the key table");
        if let Some(v) = v {
            map.insert(k.to_string(), v.clone());
        }
    }
    Ok(map)
}

pub fn req<'m>(map: &'m BTreeMap<String, String>, key: &str) -> Result<&'m str, CliError> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| CliError::Usage(format!("missing parameter `{key}`")))
}

pub fn req_f64(map: &BTreeMap<String, String>, key: &str) -> Result<f64, CliError> {
    let raw = req(map, key)?;
    raw.parse()
        .map_err(|_| CliError::Usage(format!("parameter `{key}` must be a number, got `{raw}`")))
}

pub fn req_u64(map: &BTreeMap<String, String>, key: &str) -> Result<u64, CliError> {
    let raw = req(map, key)?;
    raw.parse()
        .map_err(|_| CliError::Usage(format!("parameter `{key}` must be a nonnegative integer, got `{raw}`")))
}

pub fn req_u32(map: &BTreeMap<String, String>, key: &str) -> Result<u32, CliError> {
    let raw = req(map, key)?;
    raw.parse()
        .map_err(|_| CliError::Usage(format!("parameter `{key}` must be a nonnegative integer, got `{raw}`")))
}

pub fn req_usize(map: &BTreeMap<String, String>, key: &str) -> Result<usize, CliError> {
    let raw = req(map, key)?;
    raw.parse()
        .map_err(|_| CliError::Usage(format!("parameter `{key}` must be a nonnegative integer, got `{raw}`")))
}

pub fn opt_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(_) => req_f64(map, key).map(Some),
    }
}

/// Comma-separated float list of an exact arity.
pub fn req_f64_list(
    map: &BTreeMap<String, String>,
    key: &str,
    arity: usize,
) -> Result<Vec<f64>, CliError> {
    let raw = req(map, key)?;
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != arity {
        return Err(CliError::Usage(format!(
            "parameter `{key}` needs {arity} comma-separated values, got {} in `{raw}`",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse().map_err(|_| {
                CliError::Usage(format!("parameter `{key}`: `{p}` is not a number"))
            })
        })
        .collect()
}

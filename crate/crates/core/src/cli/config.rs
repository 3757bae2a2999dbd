//! `key = value` option files.
//!
//! Keys are long flag names (`pages-per-block` or `pages_per_block`). Blank
//! lines and lines starting with `#` are skipped. Boolean flags take
//! `true`/`false`.

use std::path::Path;

use crate::error::{Error, Result};

const BOOLEAN_KEYS: &[&str] = &["simulate"];

/// Parses `text` into `(key, value)` pairs with keys normalized to flag form.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got '{line}'", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Turns config entries into command-line arguments.
pub fn to_args(entries: &[(String, String)]) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (k, v) in entries {
        if k == "config" {
            return Err(Error::Config("config files cannot include other config files".into()));
        }
        if BOOLEAN_KEYS.contains(&k.as_str()) {
            match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => args.push(format!("--{k}")),
                "false" | "no" | "0" => {}
                _ => return Err(Error::Config(format!("{k}: expected true or false, got '{v}'"))),
            }
        } else {
            args.push(format!("--{k}={v}"));
        }
    }
    Ok(args)
}

pub fn load(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
    to_args(&parse(&text)?)
}

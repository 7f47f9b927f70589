//! Defaults from a key=value file.
//!
//! Blank lines and lines starting with '#' are ignored. Keys use the long flag
//! names: n, genus, insertions, cap, caps, mode, edge-sign, cache-dir, threads.

use std::collections::BTreeMap;
use std::path::Path;

pub const KEYS: [&str; 9] = ["n", "genus", "insertions", "cap", "caps", "mode", "edge-sign", "cache-dir", "threads"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", no + 1))?;
            let key = k.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("config line {}: unknown key {key:?}", no + 1));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parsed value, or None when absent.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| format!("config key {key}: cannot parse {v:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let c = Config::parse("# defaults\nn = 2\nedge_sign=proof\n\ninsertions=0:11;0:11\n").unwrap();
        assert_eq!(c.parsed::<usize>("n").unwrap(), Some(2));
        assert_eq!(c.get("edge-sign"), Some("proof"));
        assert_eq!(c.get("insertions"), Some("0:11;0:11"));
        assert_eq!(c.get("cap"), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(Config::parse("colour=red").is_err());
        assert!(Config::parse("n 2").is_err());
        assert!(Config::parse("n=two").unwrap().parsed::<usize>("n").is_err());
    }
}

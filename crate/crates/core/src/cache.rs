//! Content-addressed JSON cache on disk.
//!
//! An entry is `<sha256 of the key>.json` holding the key, the payload and a
//! checksum of the payload. Writes go to a temporary file in the same
//! directory and are renamed into place, so concurrent processes never see a
//! partial entry. Entries that fail to parse or verify are reported and
//! treated as misses.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::engine::{BracketTable, EdgeSign};
use crate::error::{QplError, Result};
use crate::qseries::{QSeries, Truncation};
use crate::scalar::Rational;

pub const CACHE_SCHEMA: u64 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_err(path: &Path, e: std::io::Error) -> QplError {
    QplError::Io(format!("{}: {e}", path.display()))
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EntryInfo {
    pub file: String,
    pub module: String,
    pub bytes: u64,
    pub valid: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CacheStats {
    pub root: String,
    pub entries: usize,
    pub invalid: usize,
    pub bytes: u64,
    pub modules: std::collections::BTreeMap<String, usize>,
}

pub struct DiskCache {
    root: PathBuf,
    hits: AtomicU64,
    warnings: Mutex<Vec<String>>,
}

impl DiskCache {
    /// Opens (creating if needed) a cache directory.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| io_err(&root, e))?;
        Ok(DiskCache { root, hits: AtomicU64::new(0), warnings: Mutex::new(Vec::new()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    /// Warnings collected so far (corrupt or mismatched entries).
    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut *self.warnings.lock().unwrap())
    }

    fn warn(&self, msg: String) {
        self.warnings.lock().unwrap().push(msg);
    }

    fn key_doc(module: &str, params: &Value) -> Value {
        json!({"module": module, "params": params, "version": CODE_VERSION})
    }

    pub fn path_for(&self, module: &str, params: &Value) -> PathBuf {
        let key = serde_json::to_string(&Self::key_doc(module, params)).expect("json");
        self.root.join(format!("{}.json", sha_hex(key.as_bytes())))
    }

    fn verify(doc: &Value, key: &Value) -> std::result::Result<Value, String> {
        if doc["schema"].as_u64() != Some(CACHE_SCHEMA) {
            return Err("unknown schema".into());
        }
        if &doc["key"] != key {
            return Err("key mismatch".into());
        }
        let payload = doc.get("payload").ok_or("missing payload")?;
        let sum = sha_hex(serde_json::to_string(payload).expect("json").as_bytes());
        if doc["checksum"].as_str() != Some(sum.as_str()) {
            return Err("checksum mismatch".into());
        }
        Ok(payload.clone())
    }

    /// The stored payload, or None on a miss. Corrupt entries produce a warning.
    pub fn get(&self, module: &str, params: &Value) -> Option<Value> {
        let path = self.path_for(module, params);
        let text = fs::read_to_string(&path).ok()?;
        let key = Self::key_doc(module, params);
        let checked = serde_json::from_str::<Value>(&text).map_err(|e| e.to_string()).and_then(|doc| Self::verify(&doc, &key));
        match checked {
            Ok(payload) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                Some(payload)
            }
            Err(why) => {
                self.warn(format!("ignoring cache entry {}: {why}; recomputing", path.display()));
                None
            }
        }
    }

    /// Stores a payload atomically.
    pub fn put(&self, module: &str, params: &Value, payload: &Value) -> Result<()> {
        let path = self.path_for(module, params);
        let sum = sha_hex(serde_json::to_string(payload).expect("json").as_bytes());
        let doc = json!({
            "schema": CACHE_SCHEMA,
            "key": Self::key_doc(module, params),
            "checksum": sum,
            "payload": payload,
        });
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root).map_err(|e| io_err(&self.root, e))?;
        tmp.write_all(serde_json::to_string(&doc).expect("json").as_bytes()).map_err(|e| io_err(&path, e))?;
        tmp.persist(&path).map_err(|e| io_err(&path, e.error))?;
        Ok(())
    }

    fn entry_files(&self) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for e in fs::read_dir(&self.root).map_err(|e| io_err(&self.root, e))? {
            let p = e.map_err(|e| io_err(&self.root, e))?.path();
            if p.extension().is_some_and(|x| x == "json") {
                out.push(p);
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn list(&self) -> Result<Vec<EntryInfo>> {
        let mut out = Vec::new();
        for p in self.entry_files()? {
            let bytes = fs::metadata(&p).map(|m| m.len()).unwrap_or(0);
            let doc = fs::read_to_string(&p).ok().and_then(|t| serde_json::from_str::<Value>(&t).ok());
            let (module, valid) = match &doc {
                Some(d) => (d["key"]["module"].as_str().unwrap_or("?").to_string(), Self::verify(d, &d["key"]).is_ok()),
                None => ("?".to_string(), false),
            };
            let file = p.file_name().unwrap().to_string_lossy().into_owned();
            out.push(EntryInfo { file, module, bytes, valid });
        }
        Ok(out)
    }

    /// Removes every entry; returns how many were removed.
    pub fn clear(&self) -> Result<usize> {
        let files = self.entry_files()?;
        for p in &files {
            fs::remove_file(p).map_err(|e| io_err(p, e))?;
        }
        Ok(files.len())
    }

    pub fn stats(&self) -> Result<CacheStats> {
        let list = self.list()?;
        let mut modules = std::collections::BTreeMap::new();
        for e in &list {
            *modules.entry(e.module.clone()).or_insert(0) += 1;
        }
        Ok(CacheStats {
            root: self.root.display().to_string(),
            entries: list.len(),
            invalid: list.iter().filter(|e| !e.valid).count(),
            bytes: list.iter().map(|e| e.bytes).sum(),
            modules,
        })
    }
}

pub fn truncation_json(t: &Truncation) -> Value {
    json!({"n": t.n, "total": t.total, "per_var": t.per_var})
}

pub fn bracket_params(n: usize, trunc: &Truncation, sign: EdgeSign, depth: usize) -> Value {
    json!({"n": n, "trunc": truncation_json(trunc), "sign": sign.name(), "depth": depth, "mode": "numeric"})
}

pub fn bracket_table_to_json(t: &BracketTable<Rational>) -> Value {
    let entries: Vec<Value> = t
        .entries
        .iter()
        .map(|(k, s)| json!({"point": k, "s": s.iter().map(QSeries::to_json).collect::<Vec<_>>()}))
        .collect();
    json!({"n": t.n, "depth": t.depth, "entries": entries})
}

pub fn bracket_table_from_json(v: &Value) -> Result<BracketTable<Rational>> {
    let bad = |m: &str| QplError::Data(format!("bracket table json: {m}"));
    let n = v["n"].as_u64().ok_or_else(|| bad("n"))? as usize;
    let depth = v["depth"].as_u64().ok_or_else(|| bad("depth"))? as usize;
    let mut entries = std::collections::BTreeMap::new();
    for e in v["entries"].as_array().ok_or_else(|| bad("entries"))? {
        let k = e["point"].as_u64().ok_or_else(|| bad("point"))? as usize;
        let s: Vec<QSeries<Rational>> =
            e["s"].as_array().ok_or_else(|| bad("s"))?.iter().map(QSeries::from_json).collect::<Result<_>>()?;
        if s.len() != depth + 1 {
            return Err(bad("depth"));
        }
        entries.insert(k, s);
    }
    Ok(BracketTable { n, depth, entries })
}

/// Numeric brackets, read from the cache when present.
pub fn cached_numeric_brackets(
    cache: Option<&DiskCache>,
    n: usize,
    trunc: &Truncation,
    sign: EdgeSign,
    depth: usize,
) -> Result<BracketTable<Rational>> {
    let params = bracket_params(n, trunc, sign, depth);
    if let Some(c) = cache {
        if let Some(v) = c.get("brackets", &params) {
            if let Ok(t) = bracket_table_from_json(&v) {
                return Ok(t);
            }
            c.warn("unreadable bracket table payload; recomputing".into());
        }
    }
    let t = crate::pipeline::numeric_brackets(n, trunc, sign, depth)?;
    if let Some(c) = cache {
        c.put("brackets", &params, &bracket_table_to_json(&t))?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let c = DiskCache::open(dir.path()).unwrap();
        let key = json!({"a": 1});
        assert!(c.get("m", &key).is_none());
        c.put("m", &key, &json!({"x": "1/2"})).unwrap();
        assert_eq!(c.get("m", &key), Some(json!({"x": "1/2"})));
        assert_eq!(c.hits(), 1);
        let path = c.path_for("m", &key);
        let text = fs::read_to_string(&path).unwrap().replace("1/2", "1/3");
        fs::write(&path, text).unwrap();
        assert!(c.get("m", &key).is_none());
        assert_eq!(c.take_warnings().len(), 1);
        assert_eq!(c.stats().unwrap().invalid, 1);
        assert_eq!(c.clear().unwrap(), 1);
        assert!(c.list().unwrap().is_empty());
    }

    #[test]
    fn bracket_table_roundtrip() {
        let trunc = Truncation::total(1, 2);
        let dir = tempfile::tempdir().unwrap();
        let c = DiskCache::open(dir.path()).unwrap();
        let a = cached_numeric_brackets(Some(&c), 1, &trunc, EdgeSign::Proof, 1).unwrap();
        let b = cached_numeric_brackets(Some(&c), 1, &trunc, EdgeSign::Proof, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(c.hits(), 1);
    }
}

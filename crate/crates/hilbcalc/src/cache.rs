//! Content-addressed persistent cache.
//!
//! Entries are JSON files named by the SHA-256 of their logical key, wrapped
//! with a format version and the full key for verification. Reads are
//! tolerant: missing, corrupt, version-mismatched, or colliding entries are
//! treated as cache misses, so deleting any file (or the whole directory) is
//! always safe. Writes go through a temporary file and an atomic rename.

use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Bump when the serialized layout of any cached value changes.
const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone)]
pub struct CacheStore {
    dir: PathBuf,
}

impl CacheStore {
    /// Open (creating if needed) a cache directory.
    pub fn open(dir: PathBuf) -> std::io::Result<CacheStore> {
        fs::create_dir_all(&dir)?;
        Ok(CacheStore { dir })
    }

    /// The default directory: `$HILBCALC_CACHE`, else the platform cache
    /// directory, else `.hilbcalc-cache` in the working directory.
    pub fn default_dir() -> PathBuf {
        if let Ok(d) = std::env::var("HILBCALC_CACHE") {
            return PathBuf::from(d);
        }
        if let Ok(xdg) = std::env::var("XDG_CACHE_HOME") {
            return PathBuf::from(xdg).join("hilbcalc");
        }
        if let Ok(home) = std::env::var("HOME") {
            return PathBuf::from(home).join(".cache").join("hilbcalc");
        }
        PathBuf::from(".hilbcalc-cache")
    }

    fn path_for(&self, key: &str) -> PathBuf {
        let mut h = Sha256::new();
        h.update(key.as_bytes());
        self.dir.join(format!("{:x}.json", h.finalize()))
    }

    /// Look up a value; any problem reads as a miss.
    pub fn get(&self, key: &str) -> Option<Value> {
        let path = self.path_for(key);
        let text = fs::read_to_string(path).ok()?;
        let v: Value = serde_json::from_str(&text).ok()?;
        if v.get("version").and_then(|x| x.as_u64()) != Some(FORMAT_VERSION) {
            return None;
        }
        if v.get("key").and_then(|x| x.as_str()) != Some(key) {
            return None;
        }
        v.get("value").cloned()
    }

    /// Store a value; failures are silently ignored (the cache is advisory).
    pub fn put(&self, key: &str, value: &Value) {
        let wrapped = json!({
            "version": FORMAT_VERSION,
            "key": key,
            "value": value,
        });
        let path = self.path_for(key);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        if fs::write(&tmp, wrapped.to_string()).is_ok() {
            let _ = fs::rename(&tmp, &path);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_tolerance() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::open(dir.path().to_path_buf()).unwrap();
        assert!(store.get("missing").is_none());
        store.put("k1", &json!({"x": [1, 2, 3]}));
        assert_eq!(store.get("k1").unwrap()["x"][2], 3);
        // Corrupt the entry on disk: read becomes a miss.
        let path = store.path_for("k1");
        std::fs::write(&path, "not json").unwrap();
        assert!(store.get("k1").is_none());
        // Valid JSON with wrong version: miss.
        std::fs::write(&path, r#"{"version": 999, "key": "k1", "value": 1}"#).unwrap();
        assert!(store.get("k1").is_none());
    }
}

//! Content-addressed store for expensive estimates.
//!
//! Entries are JSON files named by the SHA-256 of the canonical JSON key,
//! so the same inputs always map to the same file and nothing is ever
//! overwritten with different content.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{io_error, CliResult};

pub const DEFAULT_DIR: &str = ".binrate-cache";

/// Bumped whenever a cached quantity changes meaning.
const LAYOUT: u32 = 1;

#[derive(Clone, Debug)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path_for<K: Serialize>(&self, key: &K) -> CliResult<Option<PathBuf>> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        let mut bytes = serde_json::to_vec(key)?;
        bytes.extend_from_slice(format!("|layout={LAYOUT}").as_bytes());
        let name = hex::encode(Sha256::digest(&bytes));
        Ok(Some(dir.join(format!("{name}.json"))))
    }

    /// Cached value for `key`, or the result of `compute`, stored on success.
    pub fn get_or_compute<K, V, F>(&self, key: &K, compute: F) -> CliResult<V>
    where
        K: Serialize,
        V: Serialize + DeserializeOwned,
        F: FnOnce() -> CliResult<V>,
    {
        let path = self.path_for(key)?;
        if let Some(p) = &path {
            if let Ok(text) = fs::read_to_string(p) {
                if let Ok(v) = serde_json::from_str(&text) {
                    return Ok(v);
                }
            }
        }
        let value = compute()?;
        if let Some(p) = &path {
            if let Some(dir) = p.parent() {
                fs::create_dir_all(dir).map_err(io_error(dir))?;
            }
            // Write then rename so a concurrent reader never sees half a file.
            let tmp = p.with_extension("json.tmp");
            fs::write(&tmp, serde_json::to_vec(&value)?).map_err(io_error(&tmp))?;
            fs::rename(&tmp, p).map_err(io_error(p))?;
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_lookup_hits_the_store() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::at(dir.path());
        let v: f64 = cache.get_or_compute(&("k", 1), || Ok(0.25)).unwrap();
        assert_eq!(v, 0.25);
        let again: f64 = cache
            .get_or_compute(&("k", 1), || panic!("should be cached"))
            .unwrap();
        assert_eq!(again, 0.25);
        let other: f64 = cache.get_or_compute(&("k", 2), || Ok(0.5)).unwrap();
        assert_eq!(other, 0.5);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
    }

    #[test]
    fn disabled_cache_always_computes() {
        let cache = Cache::disabled();
        let mut calls = 0;
        for _ in 0..2 {
            let _: u8 = cache
                .get_or_compute(&"k", || {
                    calls += 1;
                    Ok(1)
                })
                .unwrap();
        }
        assert_eq!(calls, 2);
    }
}

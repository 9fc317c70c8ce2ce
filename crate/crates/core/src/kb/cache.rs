//! Concern result cache, keyed by concern id and practice, tagged with the
//! content hash of the knowledge base it was computed from.
//!
//! On disk a cache lives at `<dir>/<hash>.json`. A file that cannot be read
//! back, or whose recorded hash differs from its name, is deleted. The
//! `fingerprint` covers the rules and the concern registry: a file written
//! under other rules or queries is discarded as well.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::sparql::ResultTable;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultCache {
    pub ontology_hash: String,
    pub fingerprint: String,
    pub created_at: u64,
    pub updated_at: u64,
    pub entries: BTreeMap<String, ResultTable>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Cache key: the concern id, plus the practice IRI for parameterized concerns.
pub fn cache_key(concern: &str, practice: Option<&str>) -> String {
    match practice {
        Some(p) => format!("{concern}|{p}"),
        None => concern.to_owned(),
    }
}

impl ResultCache {
    pub fn new(ontology_hash: impl Into<String>, fingerprint: impl Into<String>) -> Self {
        let t = now();
        ResultCache {
            ontology_hash: ontology_hash.into(),
            fingerprint: fingerprint.into(),
            created_at: t,
            updated_at: t,
            entries: BTreeMap::new(),
        }
    }

    pub fn path(dir: &Path, hash: &str) -> PathBuf {
        dir.join(format!("{hash}.json"))
    }

    pub fn get(&self, key: &str) -> Option<&ResultTable> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: String, table: ResultTable) {
        self.entries.insert(key, table);
        self.updated_at = now();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Loads the cache for `hash` from `dir`; a missing, corrupt or
    /// mismatched file yields an empty cache (the bad file is removed).
    pub fn load(dir: &Path, hash: &str, fingerprint: &str) -> ResultCache {
        let path = Self::path(dir, hash);
        let Ok(bytes) = fs::read(&path) else {
            return ResultCache::new(hash, fingerprint);
        };
        match serde_json::from_slice::<ResultCache>(&bytes) {
            Ok(cache) if cache.ontology_hash == hash && cache.fingerprint == fingerprint => cache,
            _ => {
                tracing::warn!(path = %path.display(), "discarding stale or unreadable result cache");
                let _ = fs::remove_file(&path);
                ResultCache::new(hash, fingerprint)
            }
        }
    }

    /// Writes the cache atomically (temporary file, then rename).
    pub fn save(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let path = Self::path(dir, &self.ontology_hash);
        let tmp = dir.join(format!(".{}.{}.tmp", self.ontology_hash, uuid::Uuid::new_v4().simple()));
        let json = serde_json::to_vec(self).map_err(io::Error::other)?;
        fs::write(&tmp, json)?;
        fs::rename(&tmp, &path).inspect_err(|_| {
            let _ = fs::remove_file(&tmp);
        })
    }
}

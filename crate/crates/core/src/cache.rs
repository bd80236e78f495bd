//! Content-addressed store of per-class verdicts.
//!
//! Layout: one file `<key>.verdict.json` per entry, where `key` is the
//! SHA-256 of the table, the scenario and the class's kernel signature.
//! Noncontextual entries carry their certificate and are re-verified on
//! load; an entry that fails verification is ignored and recomputed.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decision::OntModelCertificate;
use crate::indist::KernelPair;
use crate::io::{scenario_to_json, table_to_json};
use crate::model::{DataTable, Scenario};

/// Environment variable that overrides the default cache directory.
pub const CACHE_ENV: &str = "NCLAB_CACHE";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedVerdict {
    pub status: String,
    pub reason: Option<String>,
    pub certificate: Option<OntModelCertificate>,
}

#[derive(Debug)]
pub struct VerdictCache {
    dir: PathBuf,
    lock: Mutex<()>,
}

impl VerdictCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            lock: Mutex::new(()),
        }
    }

    /// `$NCLAB_CACHE` if set, else `default`.
    pub fn from_env_or(default: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) => Self::new(dir),
            None => Self::new(default),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(table: &DataTable, scenario: &Scenario, signature: &KernelPair) -> String {
        let mut hasher = Sha256::new();
        hasher.update(table_to_json(table).as_bytes());
        hasher.update([0]);
        hasher.update(scenario_to_json(scenario).as_bytes());
        hasher.update([0]);
        hasher.update(serde_json::to_string(signature).expect("signature serializes").as_bytes());
        hex::encode(hasher.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.verdict.json"))
    }

    pub fn load(&self, key: &str) -> Option<CachedVerdict> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Best effort; a failed write only costs a recomputation later.
    pub fn store(&self, key: &str, verdict: &CachedVerdict) -> std::io::Result<()> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        std::fs::create_dir_all(&self.dir)?;
        let text = serde_json::to_string_pretty(verdict).expect("verdict serializes");
        let tmp = self.dir.join(format!("{key}.tmp"));
        std::fs::write(&tmp, text)?;
        std::fs::rename(tmp, self.path(key))
    }
}

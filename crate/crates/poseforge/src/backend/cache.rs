//! Content-addressed disk cache: one JSON file per request id holding the
//! request and its response, written atomically via temp-file rename.
//!
//! Layout: `<root>/<first 2 hex of id>/<id>.json`. Concurrent readers are
//! safe; writers are atomic, so a torn entry is never observed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BackendError, BackendReply, CompletionRequest};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheEntry {
    pub request: CompletionRequest,
    pub response: BackendReply,
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    root: PathBuf,
}

impl DiskCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path_for(&self, request_id: &str) -> PathBuf {
        let shard = request_id.get(..2).unwrap_or("xx");
        self.root.join(shard).join(format!("{request_id}.json"))
    }

    /// Look up a cached response. A corrupt entry counts as a miss (it will
    /// be overwritten by the fresh result).
    pub fn get(&self, request_id: &str) -> Result<Option<CacheEntry>, BackendError> {
        let path = self.path_for(request_id);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(BackendError::Cache(format!("{}: {e}", path.display()))),
        };
        match serde_json::from_str::<CacheEntry>(&text) {
            Ok(entry) => Ok(Some(entry)),
            Err(e) => {
                log::warn!("discarding corrupt cache entry {}: {e}", path.display());
                Ok(None)
            }
        }
    }

    /// Persist a response atomically.
    pub fn put(&self, request: &CompletionRequest, reply: &BackendReply) -> Result<(), BackendError> {
        let path = self.path_for(&request.request_id);
        let entry = CacheEntry {
            request: request.clone(),
            response: reply.clone(),
        };
        let json = serde_json::to_string_pretty(&entry)
            .map_err(|e| BackendError::Cache(e.to_string()))?;
        crate::files::write_atomic(&path, json.as_bytes())
            .map_err(|e| BackendError::Cache(e.to_string()))
    }
}

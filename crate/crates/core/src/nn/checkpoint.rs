use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NetConfig, NetParams, QNetwork};
use crate::{Error, Result};

pub const NET_CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NetRecord {
    version: u32,
    config: NetConfig,
    params: NetParams,
}

/// Reads the `version` field of a checkpoint document and rejects unknown
/// versions before the rest is parsed.
pub(crate) fn check_version(value: &serde_json::Value, expected: u32) -> Result<()> {
    let found = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::CorruptCheckpoint("missing version tag".into()))?;
    if found != expected as u64 {
        return Err(Error::VersionMismatch {
            found: found as u32,
            expected,
        });
    }
    Ok(())
}

impl QNetwork {
    /// JSON checkpoint: version, config and per-layer parameter arrays.
    /// Floats are written in shortest round-trip form, so reloading is exact.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&NetRecord {
            version: NET_CHECKPOINT_VERSION,
            config: self.config.clone(),
            params: self.params.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<QNetwork> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
        check_version(&value, NET_CHECKPOINT_VERSION)?;
        let record: NetRecord =
            serde_json::from_value(value).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
        QNetwork::from_parts(record.config, record.params)
            .map_err(|e| Error::CorruptCheckpoint(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<QNetwork> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        QNetwork::from_json(&text)
    }
}

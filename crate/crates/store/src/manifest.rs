use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StoreError};

pub const MANIFEST_FILE: &str = "MANIFEST";
pub const FORMAT_VERSION: u32 = 1;
pub const HASH_ALGORITHM: &str = "sha256";

/// Self-description of a store directory. Rewritten atomically via rename;
/// replacing it is the commit point of a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub hash_algorithm: String,
    /// Generation of the live journal (`journal-<generation>.log`).
    pub generation: u64,
    /// Snapshot the journal applies on top of, if any (`snapshots/<id>/`).
    pub snapshot_id: Option<u64>,
}

impl Manifest {
    pub fn fresh() -> Self {
        Self { format_version: FORMAT_VERSION, hash_algorithm: HASH_ALGORITHM.into(), generation: 0, snapshot_id: None }
    }

    pub fn journal_file(&self) -> String {
        format!("journal-{}.log", self.generation)
    }

    pub fn load(dir: &Path) -> Result<Option<Self>> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let manifest: Manifest =
            serde_json::from_slice(&bytes).map_err(|e| StoreError::CorruptManifest(e.to_string()))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(StoreError::CorruptManifest(format!("unsupported format_version {}", manifest.format_version)));
        }
        if manifest.hash_algorithm != HASH_ALGORITHM {
            return Err(StoreError::CorruptManifest(format!(
                "unsupported hash_algorithm {:?}",
                manifest.hash_algorithm
            )));
        }
        Ok(Some(manifest))
    }

    pub fn store(&self, dir: &Path) -> Result<()> {
        let tmp = dir.join("MANIFEST.tmp");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&serde_json::to_vec_pretty(self).expect("manifest serializes"))?;
        f.sync_all()?;
        fs::rename(&tmp, dir.join(MANIFEST_FILE))?;
        sync_dir(dir)
    }
}

pub(crate) fn sync_dir(dir: &Path) -> Result<()> {
    fs::File::open(dir)?.sync_all()?;
    Ok(())
}

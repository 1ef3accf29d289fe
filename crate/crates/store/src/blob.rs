//! Content-addressed blob files under `blobs/ab/cdef...`.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, StoreError};
use crate::manifest::{sync_dir, HASH_ALGORITHM};

/// Reference to one immutable blob.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlobRef {
    pub algorithm: String,
    pub digest: String,
    pub size_bytes: u64,
}

impl BlobRef {
    pub fn for_bytes(bytes: &[u8]) -> Self {
        Self {
            algorithm: HASH_ALGORITHM.into(),
            digest: hex::encode(Sha256::digest(bytes)),
            size_bytes: bytes.len() as u64,
        }
    }

    fn is_well_formed(&self) -> bool {
        self.algorithm == HASH_ALGORITHM
            && self.digest.len() == 64
            && self.digest.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
    }
}

impl fmt::Display for BlobRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.algorithm, self.digest)
    }
}

/// Parses `sha256:<hex>`; the size is unknown and set to zero.
impl FromStr for BlobRef {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self> {
        let (algorithm, digest) = s.split_once(':').ok_or_else(|| StoreError::UnknownBlob(s.to_owned()))?;
        let r = BlobRef { algorithm: algorithm.into(), digest: digest.into(), size_bytes: 0 };
        if r.is_well_formed() {
            Ok(r)
        } else {
            Err(StoreError::UnknownBlob(s.to_owned()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlobStore {
    root: PathBuf,
}

impl BlobStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("tmp"))?;
        Ok(Self { root })
    }

    pub fn path_of(&self, r: &BlobRef) -> PathBuf {
        self.root.join(&r.digest[..2]).join(&r.digest[2..])
    }

    /// Stores `bytes`, returning the existing ref when the content is already present.
    pub fn put(&self, bytes: &[u8]) -> Result<BlobRef> {
        let r = BlobRef::for_bytes(bytes);
        let path = self.path_of(&r);
        if path.exists() {
            return Ok(r);
        }
        let shard = path.parent().expect("blob path has a shard dir");
        fs::create_dir_all(shard)?;
        let tmp = self.root.join("tmp").join(uuid::Uuid::new_v4().to_string());
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, &path)?;
        sync_dir(shard)?;
        Ok(r)
    }

    /// Reads a blob and verifies it against its digest.
    pub fn get(&self, r: &BlobRef) -> Result<Vec<u8>> {
        if !r.is_well_formed() {
            return Err(StoreError::UnknownBlob(r.to_string()));
        }
        let bytes = match fs::read(self.path_of(r)) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::UnknownBlob(r.to_string())),
            Err(e) => return Err(e.into()),
        };
        if hex::encode(Sha256::digest(&bytes)) != r.digest {
            return Err(StoreError::HashMismatch(r.to_string()));
        }
        Ok(bytes)
    }

    pub fn contains(&self, r: &BlobRef) -> bool {
        r.is_well_formed() && self.path_of(r).exists()
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

use std::io;
use std::path::PathBuf;

use crate::record::Keyspace;

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store at {0} is locked by another process")]
    LockedByAnotherProcess(PathBuf),
    #[error("corrupt manifest: {0}")]
    CorruptManifest(String),
    #[error("corrupt journal at offset {offset}: {reason}")]
    CorruptJournal { offset: u64, reason: String },
    #[error("guard failed on {keyspace}/{key}")]
    GuardFailed { keyspace: Keyspace, key: String },
    #[error("storage full")]
    StorageFull,
    #[error("unknown blob {0}")]
    UnknownBlob(String),
    #[error("blob {0} failed hash verification")]
    HashMismatch(String),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("simulated crash")]
    SimulatedCrash,
    #[error("store is unusable after an earlier write failure")]
    Poisoned,
    #[error(transparent)]
    Io(io::Error),
}

impl From<io::Error> for StoreError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::StorageFull {
            StoreError::StorageFull
        } else {
            StoreError::Io(e)
        }
    }
}

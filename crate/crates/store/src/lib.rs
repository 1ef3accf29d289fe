//! Durable storage for the portal: a journaled, snapshotting record store
//! organized by keyspace, and a content-addressed blob store.
//!
//! On-disk layout of a store directory:
//!
//! ```text
//! MANIFEST                  format_version, hash_algorithm, generation, snapshot_id
//! LOCK                      single-writer lock
//! journal-<generation>.log  committed batches since the snapshot
//! snapshots/<id>/<ks>.json  one file per keyspace
//! blobs/ab/cdef...          blobs named by SHA-256 digest
//! ```

mod blob;
mod error;
mod journal;
mod manifest;
mod record;
mod store;

pub use blob::{BlobRef, BlobStore};
pub use error::{Result, StoreError};
pub use journal::{decode_all, JournalEntry, Recovered};
pub use manifest::{Manifest, FORMAT_VERSION, HASH_ALGORITHM};
pub use record::{Document, Guard, Keyspace, Mutation, TxnBatch, ValueHash};
pub use store::{Store, StoreOptions};

//! Append-only journal of committed batches.
//!
//! Each entry on disk is
//!
//! ```text
//! ┌─────────────┬─────────────┬──────────────────────────┐
//! │ payload_len │ crc32       │ payload (JSON entry)     │
//! └─────────────┴─────────────┴──────────────────────────┘
//!      u32 LE       u32 LE        [u8; payload_len]
//! ```
//!
//! A torn write can only affect the last entry. Recovery keeps every
//! complete entry and cuts the file back to the end of the last one.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::{Result, StoreError};
use crate::record::Mutation;

const HEADER_LEN: usize = 8;
const MAX_ENTRY_LEN: u32 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub seq: u64,
    pub mutations: Vec<Mutation>,
}

impl JournalEntry {
    pub fn encode(&self) -> Vec<u8> {
        let payload = serde_json::to_vec(self).expect("journal entries always serialize");
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }
}

/// Result of scanning a journal file.
#[derive(Debug)]
pub struct Recovered {
    pub entries: Vec<JournalEntry>,
    /// Byte length of the valid prefix.
    pub valid_len: u64,
    /// Bytes past `valid_len` that were discarded as a torn tail.
    pub discarded: u64,
}

/// Decodes every entry in `bytes`, tolerating a torn tail.
pub fn decode_all(bytes: &[u8]) -> Result<Recovered> {
    let mut entries = Vec::new();
    let mut pos = 0usize;
    while pos < bytes.len() {
        let rest = &bytes[pos..];
        if rest.len() < HEADER_LEN {
            break;
        }
        let len = u32::from_le_bytes(rest[0..4].try_into().unwrap());
        let crc = u32::from_le_bytes(rest[4..8].try_into().unwrap());
        if len == 0 || len > MAX_ENTRY_LEN {
            if rest.iter().all(|b| *b == 0) {
                break;
            }
            return Err(StoreError::CorruptJournal {
                offset: pos as u64,
                reason: format!("implausible entry length {len}"),
            });
        }
        let end = HEADER_LEN + len as usize;
        if rest.len() < end {
            break;
        }
        let payload = &rest[HEADER_LEN..end];
        let is_last = rest.len() == end;
        if crc32fast::hash(payload) != crc {
            if is_last {
                break;
            }
            return Err(StoreError::CorruptJournal { offset: pos as u64, reason: "checksum mismatch".into() });
        }
        let entry: JournalEntry = serde_json::from_slice(payload)
            .map_err(|e| StoreError::CorruptJournal { offset: pos as u64, reason: e.to_string() })?;
        entries.push(entry);
        pos += end;
    }
    Ok(Recovered { entries, valid_len: pos as u64, discarded: (bytes.len() - pos) as u64 })
}

/// Writer half of the journal. Every append is fsynced before returning.
#[derive(Debug)]
pub struct Journal {
    file: File,
    path: PathBuf,
    len: u64,
    /// Remaining bytes the fail point lets through; `None` means unlimited.
    crash_budget: Option<u64>,
}

impl Journal {
    /// Opens (creating if needed) the journal and returns its recovered entries.
    pub fn open(path: &Path, crash_budget: Option<u64>) -> Result<(Self, Vec<JournalEntry>)> {
        let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let recovered = decode_all(&bytes)?;
        if recovered.discarded > 0 {
            warn!(
                path = %path.display(),
                discarded = recovered.discarded,
                "discarding torn journal tail"
            );
            file.set_len(recovered.valid_len)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::Start(recovered.valid_len))?;
        Ok((Self { file, path: path.to_owned(), len: recovered.valid_len, crash_budget }, recovered.entries))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn crash_budget(&self) -> Option<u64> {
        self.crash_budget
    }

    pub fn append(&mut self, entry: &JournalEntry) -> Result<()> {
        let bytes = entry.encode();
        if let Some(budget) = self.crash_budget.as_mut() {
            if (bytes.len() as u64) > *budget {
                let cut = *budget as usize;
                *budget = 0;
                self.file.write_all(&bytes[..cut])?;
                self.file.sync_data()?;
                return Err(StoreError::SimulatedCrash);
            }
            *budget -= bytes.len() as u64;
        }
        if let Err(e) = self.file.write_all(&bytes).and_then(|_| self.file.sync_data()) {
            // Leave no half-written entry behind for later appends to follow.
            let _ = self.file.set_len(self.len);
            let _ = self.file.seek(SeekFrom::Start(self.len));
            return Err(e.into());
        }
        self.len += bytes.len() as u64;
        Ok(())
    }
}

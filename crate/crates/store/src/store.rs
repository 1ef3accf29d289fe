use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use tracing::{debug, warn};

use crate::blob::{BlobRef, BlobStore};
use crate::error::{Result, StoreError};
use crate::journal::{Journal, JournalEntry};
use crate::manifest::{sync_dir, Manifest};
use crate::record::{Document, Guard, Keyspace, Mutation, TxnBatch, ValueHash};

type Table = BTreeMap<String, Document>;
type Tables = BTreeMap<Keyspace, Table>;

#[derive(Debug, Clone)]
pub struct StoreOptions {
    /// Journal size that triggers a snapshot after a commit.
    pub snapshot_threshold_bytes: u64,
    /// Fault injection: let only this many journal bytes reach disk, then
    /// fail the commit as if the process died mid-write.
    pub crash_after_journal_bytes: Option<u64>,
}

impl Default for StoreOptions {
    fn default() -> Self {
        Self { snapshot_threshold_bytes: 8 << 20, crash_after_journal_bytes: None }
    }
}

#[derive(Debug)]
struct Writer {
    journal: Journal,
    manifest: Manifest,
    next_seq: u64,
    poisoned: bool,
}

/// Durable keyspace/key record store with atomic guarded batches, plus a blob store.
///
/// Commits are serialized; reads run concurrently and only ever see fully
/// applied batches.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    _lock: File,
    tables: RwLock<Tables>,
    writer: Mutex<Writer>,
    blobs: BlobStore,
    options: StoreOptions,
}

impl Store {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        Self::open_with(dir, StoreOptions::default())
    }

    pub fn open_with(dir: impl AsRef<Path>, options: StoreOptions) -> Result<Self> {
        let dir = dir.as_ref().to_owned();
        fs::create_dir_all(&dir)?;

        let lock = OpenOptions::new().write(true).create(true).truncate(false).open(dir.join("LOCK"))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(TryLockError::WouldBlock) => return Err(StoreError::LockedByAnotherProcess(dir)),
            Err(TryLockError::Error(e)) => return Err(e.into()),
        }

        let manifest = match Manifest::load(&dir)? {
            Some(m) => m,
            None => {
                if has_store_files(&dir)? {
                    return Err(StoreError::CorruptManifest("MANIFEST missing from a non-empty store".into()));
                }
                let m = Manifest::fresh();
                m.store(&dir)?;
                m
            }
        };

        let mut tables: Tables = Keyspace::ALL.iter().map(|k| (*k, Table::new())).collect();
        if let Some(id) = manifest.snapshot_id {
            load_snapshot(&dir, id, &mut tables)?;
        }

        let (journal, entries) = Journal::open(&dir.join(manifest.journal_file()), options.crash_after_journal_bytes)?;
        let mut next_seq = 0;
        for entry in &entries {
            apply(&mut tables, &entry.mutations);
            next_seq = entry.seq + 1;
        }
        debug!(dir = %dir.display(), replayed = entries.len(), "store opened");

        let blobs = BlobStore::open(dir.join("blobs"))?;
        Ok(Self {
            dir,
            _lock: lock,
            tables: RwLock::new(tables),
            writer: Mutex::new(Writer { journal, manifest, next_seq, poisoned: false }),
            blobs,
            options,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Applies `batch` atomically. Guards are checked first; if any fails,
    /// nothing is written. On success the batch is durable.
    pub fn execute(&self, batch: TxnBatch) -> Result<()> {
        if batch.is_empty() {
            return Ok(());
        }
        for m in &batch.mutations {
            if let Mutation::Put { value, .. } = m {
                value.validate()?;
            }
        }

        let mut writer = self.writer.lock().expect("writer lock poisoned");
        if writer.poisoned {
            return Err(StoreError::Poisoned);
        }
        {
            let tables = self.tables.read().expect("table lock poisoned");
            for guard in &batch.guards {
                check_guard(&tables, guard)?;
            }
        }
        if batch.mutations.is_empty() {
            return Ok(());
        }

        let entry = JournalEntry { seq: writer.next_seq, mutations: batch.mutations };
        if let Err(e) = writer.journal.append(&entry) {
            if matches!(e, StoreError::SimulatedCrash) {
                writer.poisoned = true;
            }
            return Err(e);
        }
        writer.next_seq += 1;
        apply(&mut self.tables.write().expect("table lock poisoned"), &entry.mutations);

        if writer.journal.len() >= self.options.snapshot_threshold_bytes {
            if let Err(e) = self.snapshot_locked(&mut writer) {
                warn!(error = %e, "snapshot failed; journal keeps growing");
            }
        }
        Ok(())
    }

    /// Writes a snapshot of every keyspace and starts a fresh journal.
    pub fn snapshot(&self) -> Result<()> {
        let mut writer = self.writer.lock().expect("writer lock poisoned");
        if writer.poisoned {
            return Err(StoreError::Poisoned);
        }
        self.snapshot_locked(&mut writer)
    }

    fn snapshot_locked(&self, writer: &mut Writer) -> Result<()> {
        let old = writer.manifest.clone();
        let generation = old.generation + 1;
        let snap_dir = self.dir.join("snapshots").join(generation.to_string());
        fs::create_dir_all(&snap_dir)?;
        {
            let tables = self.tables.read().expect("table lock poisoned");
            for (ks, table) in tables.iter() {
                let mut f = File::create(snap_dir.join(format!("{ks}.json")))?;
                f.write_all(&serde_json::to_vec(table).expect("tables serialize"))?;
                f.sync_all()?;
            }
        }
        sync_dir(&snap_dir)?;
        sync_dir(&self.dir.join("snapshots"))?;

        let manifest = Manifest { generation, snapshot_id: Some(generation), ..old.clone() };
        let (journal, _) = Journal::open(&self.dir.join(manifest.journal_file()), writer.journal.crash_budget())?;
        sync_dir(&self.dir)?;
        manifest.store(&self.dir)?;

        let old_journal = writer.journal.path().to_owned();
        writer.journal = journal;
        writer.manifest = manifest;
        let _ = fs::remove_file(old_journal);
        if let Some(id) = old.snapshot_id {
            let _ = fs::remove_dir_all(self.dir.join("snapshots").join(id.to_string()));
        }
        debug!(generation, "snapshot written");
        Ok(())
    }

    pub fn get(&self, keyspace: Keyspace, key: &str) -> Option<Document> {
        self.tables.read().expect("table lock poisoned")[&keyspace].get(key).cloned()
    }

    /// Reads a record together with the hash a guard would compare against.
    pub fn get_with_hash(&self, keyspace: Keyspace, key: &str) -> Option<(Document, ValueHash)> {
        self.get(keyspace, key).map(|d| {
            let h = d.hash();
            (d, h)
        })
    }

    /// All records whose key starts with `prefix`, in lexicographic key order.
    pub fn scan(&self, keyspace: Keyspace, prefix: &str) -> Vec<(String, Document)> {
        let tables = self.tables.read().expect("table lock poisoned");
        tables[&keyspace]
            .range(prefix.to_owned()..)
            .take_while(|(k, _)| k.starts_with(prefix))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    pub fn count(&self, keyspace: Keyspace) -> usize {
        self.tables.read().expect("table lock poisoned")[&keyspace].len()
    }

    /// Sequence number of the most recently committed batch, if any.
    pub fn last_seq(&self) -> Option<u64> {
        self.writer.lock().expect("writer lock poisoned").next_seq.checked_sub(1)
    }

    pub fn store_blob(&self, bytes: &[u8]) -> Result<BlobRef> {
        self.blobs.put(bytes)
    }

    pub fn fetch_blob(&self, r: &BlobRef) -> Result<Vec<u8>> {
        self.blobs.get(r)
    }

    pub fn blobs(&self) -> &BlobStore {
        &self.blobs
    }
}

fn has_store_files(dir: &Path) -> Result<bool> {
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name();
        let name = name.to_string_lossy();
        if name.starts_with("journal-") || name == "snapshots" {
            return Ok(true);
        }
    }
    Ok(false)
}

fn load_snapshot(dir: &Path, id: u64, tables: &mut Tables) -> Result<()> {
    let snap_dir = dir.join("snapshots").join(id.to_string());
    for ks in Keyspace::ALL {
        let path = snap_dir.join(format!("{ks}.json"));
        let bytes = fs::read(&path)
            .map_err(|e| StoreError::CorruptManifest(format!("snapshot {} unreadable: {e}", path.display())))?;
        let table: Table = serde_json::from_slice(&bytes)
            .map_err(|e| StoreError::CorruptManifest(format!("snapshot {} malformed: {e}", path.display())))?;
        tables.insert(ks, table);
    }
    Ok(())
}

fn check_guard(tables: &Tables, guard: &Guard) -> Result<()> {
    let (keyspace, key, ok) = match guard {
        Guard::Absent { keyspace, key } => (keyspace, key, !tables[keyspace].contains_key(key)),
        Guard::Matches { keyspace, key, hash } => {
            (keyspace, key, tables[keyspace].get(key).map(Document::hash) == Some(*hash))
        }
    };
    if ok {
        Ok(())
    } else {
        Err(StoreError::GuardFailed { keyspace: *keyspace, key: key.clone() })
    }
}

fn apply(tables: &mut Tables, mutations: &[Mutation]) {
    for m in mutations {
        match m {
            Mutation::Put { keyspace, key, value } => {
                tables.get_mut(keyspace).expect("all keyspaces present").insert(key.clone(), value.clone());
            }
            Mutation::Delete { keyspace, key } => {
                tables.get_mut(keyspace).expect("all keyspaces present").remove(key);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc(n: i64) -> Document {
        Document::new(1, json!({ "n": n }))
    }

    #[test]
    fn fresh_dir_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        for ks in Keyspace::ALL {
            assert_eq!(store.count(ks), 0);
        }
        assert_eq!(store.last_seq(), None);
        assert!(dir.path().join("MANIFEST").exists());
    }

    #[test]
    fn put_get_and_absent() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.get(Keyspace::Glossary, "k"), None);
        store.execute(TxnBatch::new().put(Keyspace::Glossary, "k", doc(7))).unwrap();
        assert_eq!(store.get(Keyspace::Glossary, "k"), Some(doc(7)));
        assert_eq!(store.get(Keyspace::Resources, "k"), None);
    }

    #[test]
    fn empty_batch_is_a_no_op() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.execute(TxnBatch::new()).unwrap();
        assert_eq!(store.last_seq(), None);
    }

    #[test]
    fn failed_guard_changes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.execute(TxnBatch::new().put(Keyspace::Resources, "a", doc(0))).unwrap();
        let h0 = doc(0).hash();
        store.execute(TxnBatch::new().put(Keyspace::Resources, "a", doc(1))).unwrap();
        let err = store
            .execute(
                TxnBatch::new().expect_hash(Keyspace::Resources, "a", h0).put(Keyspace::Resources, "a", doc(2)).put(
                    Keyspace::Resources,
                    "b",
                    doc(2),
                ),
            )
            .unwrap_err();
        assert!(matches!(err, StoreError::GuardFailed { ref key, .. } if key == "a"));
        assert_eq!(store.get(Keyspace::Resources, "a"), Some(doc(1)));
        assert_eq!(store.get(Keyspace::Resources, "b"), None);

        let err = store.execute(TxnBatch::new().expect_absent(Keyspace::Resources, "a")).unwrap_err();
        assert!(matches!(err, StoreError::GuardFailed { .. }));
    }

    #[test]
    fn rejects_schema_version_zero() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let err = store.execute(TxnBatch::new().put(Keyspace::Resources, "a", Document::new(0, json!(1)))).unwrap_err();
        assert!(matches!(err, StoreError::InvalidRecord(_)));
    }

    #[test]
    fn second_open_is_locked_out() {
        let dir = tempfile::tempdir().unwrap();
        let _first = Store::open(dir.path()).unwrap();
        assert!(matches!(Store::open(dir.path()), Err(StoreError::LockedByAnotherProcess(_))));
    }

    #[test]
    fn lock_released_on_drop() {
        let dir = tempfile::tempdir().unwrap();
        drop(Store::open(dir.path()).unwrap());
        Store::open(dir.path()).unwrap();
    }

    #[test]
    fn missing_manifest_with_journal_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = Store::open(dir.path()).unwrap();
            store.execute(TxnBatch::new().put(Keyspace::Resources, "a", doc(0))).unwrap();
        }
        fs::remove_file(dir.path().join("MANIFEST")).unwrap();
        assert!(matches!(Store::open(dir.path()), Err(StoreError::CorruptManifest(_))));
    }

    #[test]
    fn snapshot_then_reopen_keeps_everything() {
        let dir = tempfile::tempdir().unwrap();
        let opts = StoreOptions { snapshot_threshold_bytes: 512, ..Default::default() };
        {
            let store = Store::open_with(dir.path(), opts.clone()).unwrap();
            for i in 0..50 {
                store.execute(TxnBatch::new().put(Keyspace::Revisions, format!("r{i:03}"), doc(i))).unwrap();
            }
            store.execute(TxnBatch::new().delete(Keyspace::Revisions, "r007")).unwrap();
        }
        let manifest = Manifest::load(dir.path()).unwrap().unwrap();
        assert!(manifest.generation > 0);
        let store = Store::open_with(dir.path(), opts).unwrap();
        assert_eq!(store.count(Keyspace::Revisions), 49);
        assert_eq!(store.get(Keyspace::Revisions, "r049"), Some(doc(49)));
        assert_eq!(store.get(Keyspace::Revisions, "r007"), None);
        assert_eq!(store.last_seq(), Some(50));
        // Only the live snapshot and journal remain.
        let journals = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("journal-"))
            .count();
        assert_eq!(journals, 1);
        assert_eq!(fs::read_dir(dir.path().join("snapshots")).unwrap().count(), 1);
    }

    #[test]
    fn prefix_scan_is_ordered_and_exact() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let mut batch = TxnBatch::new();
        for i in (1..=9).rev() {
            batch = batch
                .put(Keyspace::Resources, format!("res/{i}"), doc(i))
                .put(Keyspace::Resources, format!("rev/{i}"), doc(i))
                .put(Keyspace::Resources, format!("res{i}"), doc(i));
        }
        store.execute(batch).unwrap();
        let keys: Vec<String> = store.scan(Keyspace::Resources, "res/").into_iter().map(|(k, _)| k).collect();
        let mut expected: Vec<String> = (1..=9).map(|i| format!("res/{i}")).collect();
        expected.sort();
        assert_eq!(keys, expected);
    }
}

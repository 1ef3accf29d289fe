//! Content bundles: a directory holding a `manifest` file with every
//! resource, revision, attachment record, taxonomy node and glossary entry,
//! plus `blobs/<sha256 hex>` for the attachment payloads.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use belnet_store::{BlobRef, Keyspace, TxnBatch, HASH_ALGORITHM};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::access::{AccessTier, Action, DenyReason, Role};
use crate::error::{PortalError, Result};
use crate::ids::{AttachmentId, ResourceId, TaxonomyNodeId};
use crate::model::{glossary_key, Actor, Attachment, GlossaryEntry, Resource, Revision, TaxonomyNode};
use crate::portal::{child_key, doc, guard_failure, node_key, revision_key, ChildIndex, Portal};

pub const BUNDLE_FORMAT: &str = "belnet-content-bundle";
pub const BUNDLE_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest";
pub const BLOB_DIR: &str = "blobs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub format: String,
    pub version: u32,
    pub hash_algorithm: String,
    pub exported_at: DateTime<Utc>,
    pub taxonomy: Vec<TaxonomyNode>,
    pub glossary: Vec<GlossaryEntry>,
    pub resources: Vec<Resource>,
    pub revisions: Vec<Revision>,
    pub attachments: Vec<Attachment>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleSummary {
    pub taxonomy_nodes: usize,
    pub glossary_entries: usize,
    pub resources: usize,
    pub revisions: usize,
    pub attachments: usize,
    pub blobs: usize,
}

impl BundleManifest {
    fn summary(&self, blobs: usize) -> BundleSummary {
        BundleSummary {
            taxonomy_nodes: self.taxonomy.len(),
            glossary_entries: self.glossary.len(),
            resources: self.resources.len(),
            revisions: self.revisions.len(),
            attachments: self.attachments.len(),
            blobs,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> PortalError {
    PortalError::InvalidBundle(format!("{}: {e}", path.display()))
}

impl Portal {
    /// Writes the whole content model into `dir`, which must be absent or
    /// empty. Accounts and sessions are not exported.
    pub fn export_bundle(&self, dir: &Path, actor: &Actor) -> Result<BundleSummary> {
        self.check_system_admin(actor)?;
        if dir.exists() && fs::read_dir(dir).map_err(|e| io_err(dir, e))?.next().is_some() {
            return Err(PortalError::InvalidInput(format!("{} is not empty", dir.display())));
        }

        // Resources first: anything they reference is committed no later
        // than they are, so the later scans see it.
        let resources: Vec<Resource> = self.scan(Keyspace::Resources, "")?;
        let mut revisions = Vec::new();
        let mut attachments = Vec::new();
        for r in &resources {
            let mut revs: Vec<Revision> = self.scan(Keyspace::Revisions, &format!("{}/", r.id))?;
            revs.truncate(r.current_revision as usize + 1);
            revisions.extend(revs);
            for a in &r.attachment_ids {
                let att: Attachment = self
                    .load(Keyspace::Attachments, &a.to_string())?
                    .ok_or_else(|| PortalError::NotFound(format!("attachment {a}")))?;
                attachments.push(att);
            }
        }
        let manifest = BundleManifest {
            format: BUNDLE_FORMAT.into(),
            version: BUNDLE_VERSION,
            hash_algorithm: HASH_ALGORITHM.into(),
            exported_at: self.now(),
            taxonomy: self.list_taxonomy()?,
            glossary: self.search_terms("")?,
            resources,
            revisions,
            attachments,
        };

        let blob_dir = dir.join(BLOB_DIR);
        fs::create_dir_all(&blob_dir).map_err(|e| io_err(&blob_dir, e))?;
        let mut written = HashSet::new();
        for a in &manifest.attachments {
            if written.insert(a.blob_ref.digest.clone()) {
                let bytes = self.store().fetch_blob(&a.blob_ref)?;
                let path = blob_dir.join(&a.blob_ref.digest);
                fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
            }
        }
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| PortalError::InvalidBundle(e.to_string()))?;
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        Ok(manifest.summary(written.len()))
    }

    /// Loads a bundle in one transaction. Nothing is written if the bundle is
    /// inconsistent, a blob fails verification, or any record already exists.
    pub fn import_bundle(&self, dir: &Path, actor: &Actor) -> Result<BundleSummary> {
        self.check_system_admin(actor)?;
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let m: BundleManifest = serde_json::from_str(&text).map_err(|e| PortalError::InvalidBundle(e.to_string()))?;
        if m.format != BUNDLE_FORMAT || m.version != BUNDLE_VERSION || m.hash_algorithm != HASH_ALGORITHM {
            return Err(PortalError::InvalidBundle(format!(
                "unsupported bundle {} v{} ({})",
                m.format, m.version, m.hash_algorithm
            )));
        }
        self.validate_bundle(&m)?;

        let mut blobs: BTreeMap<String, Vec<u8>> = BTreeMap::new();
        for a in &m.attachments {
            if blobs.contains_key(&a.blob_ref.digest) {
                continue;
            }
            // Parsing the ref first keeps a hostile digest from naming a path.
            let r: BlobRef = format!("{}:{}", a.blob_ref.algorithm, a.blob_ref.digest)
                .parse()
                .map_err(|_| PortalError::InvalidBundle(format!("bad blob ref on attachment {}", a.id)))?;
            let p = dir.join(BLOB_DIR).join(&r.digest);
            let bytes = fs::read(&p).map_err(|e| io_err(&p, e))?;
            let actual = BlobRef::for_bytes(&bytes);
            if actual.digest != a.blob_ref.digest || actual.size_bytes != a.blob_ref.size_bytes {
                return Err(PortalError::InvalidBundle(format!("blob {} fails verification", r.digest)));
            }
            blobs.insert(r.digest, bytes);
        }

        let mut batch = TxnBatch::new();
        let mut put = |ks: Keyspace, key: String, value: belnet_store::Document| {
            batch = std::mem::take(&mut batch).expect_absent(ks, &key).put(ks, key, value);
        };
        for n in &m.taxonomy {
            put(Keyspace::Taxonomy, node_key(n.id), doc(n)?);
            put(Keyspace::Taxonomy, child_key(n.parent_id, &n.label), doc(&ChildIndex { id: n.id })?);
        }
        for g in &m.glossary {
            put(Keyspace::Glossary, glossary_key(&g.term), doc(g)?);
        }
        for r in &m.resources {
            put(Keyspace::Resources, r.id.to_string(), doc(r)?);
        }
        for r in &m.revisions {
            put(Keyspace::Revisions, revision_key(r.resource_id, r.index), doc(r)?);
        }
        for a in &m.attachments {
            put(Keyspace::Attachments, a.id.to_string(), doc(a)?);
        }

        for bytes in blobs.values() {
            self.store().store_blob(bytes)?;
        }
        match self.execute(batch) {
            Ok(()) => Ok(m.summary(blobs.len())),
            Err(e) => match guard_failure(&e) {
                Some((ks, key)) => Err(PortalError::BundleConflict(format!("{ks}/{key} already exists"))),
                None => Err(e.into()),
            },
        }
    }

    /// Bundles cover the whole store, so only the system administrator may
    /// move them in or out.
    fn check_system_admin(&self, actor: &Actor) -> Result<()> {
        self.check(actor, Action::Admin, AccessTier::Restricted)?;
        if actor.role != Role::SystemAdmin {
            return Err(PortalError::AuthorizationDenied(DenyReason::NotAnAdmin));
        }
        Ok(())
    }

    fn validate_bundle(&self, m: &BundleManifest) -> Result<()> {
        let bad = |s: String| Err(PortalError::InvalidBundle(s));

        let nodes: HashMap<TaxonomyNodeId, &TaxonomyNode> = m.taxonomy.iter().map(|n| (n.id, n)).collect();
        if nodes.len() != m.taxonomy.len() {
            return bad("duplicate taxonomy node id".into());
        }
        let node_exists =
            |id: TaxonomyNodeId| -> Result<bool> { Ok(nodes.contains_key(&id) || self.taxonomy_node(id)?.is_some()) };
        let mut siblings = HashSet::new();
        for n in &m.taxonomy {
            if !siblings.insert(child_key(n.parent_id, &n.label)) {
                return bad(format!("taxonomy label {:?} repeats among siblings", n.label));
            }
            if let Some(p) = n.parent_id {
                if !node_exists(p)? {
                    return bad(format!("taxonomy node {} has unknown parent {p}", n.id));
                }
            }
            // Walk up within the bundle; store nodes are already acyclic.
            let mut seen = HashSet::from([n.id]);
            let mut cursor = n.parent_id;
            while let Some(c) = cursor {
                if !seen.insert(c) {
                    return Err(PortalError::CycleRejected);
                }
                cursor = nodes.get(&c).and_then(|x| x.parent_id);
            }
        }

        let mut keys = HashSet::new();
        for g in &m.glossary {
            let k = glossary_key(&g.term);
            if k.is_empty() {
                return Err(PortalError::EmptyTerm);
            }
            if !keys.insert(k) {
                return bad(format!("glossary term {:?} appears twice", g.term));
            }
            belnet_markup::parse(&g.definition)?;
        }

        let mut revs: HashMap<ResourceId, Vec<&Revision>> = HashMap::new();
        for r in &m.revisions {
            revs.entry(r.resource_id).or_default().push(r);
        }
        let atts: HashMap<AttachmentId, &Attachment> = m.attachments.iter().map(|a| (a.id, a)).collect();
        if atts.len() != m.attachments.len() {
            return bad("duplicate attachment id".into());
        }
        let mut owned = 0;
        let mut ids = HashSet::new();
        for r in &m.resources {
            if !ids.insert(r.id) {
                return bad(format!("resource {} appears twice", r.id));
            }
            for t in &r.taxonomy_ids {
                if !node_exists(*t)? {
                    return Err(PortalError::UnknownTaxonomyNode(t.to_string()));
                }
            }
            belnet_markup::parse(&r.body)?;
            let mut history = revs.remove(&r.id).unwrap_or_default();
            history.sort_by_key(|x| x.index);
            let contiguous = history.iter().enumerate().all(|(i, x)| x.index == i as u64);
            if !contiguous || history.len() as u64 != r.current_revision + 1 {
                return bad(format!("resource {} has a broken revision history", r.id));
            }
            for a in &r.attachment_ids {
                match atts.get(a) {
                    Some(att) if att.resource_id == r.id && att.size_bytes == att.blob_ref.size_bytes => owned += 1,
                    _ => return bad(format!("resource {} lists a missing or foreign attachment {a}", r.id)),
                }
            }
        }
        if let Some(id) = revs.keys().next() {
            return bad(format!("revisions for unknown resource {id}"));
        }
        if owned != m.attachments.len() {
            return bad("attachment not listed by any resource".into());
        }
        Ok(())
    }
}

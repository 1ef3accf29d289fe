use std::cmp::Ordering;
use std::collections::BTreeSet;

use belnet_store::{Keyspace, TxnBatch};
use serde::{Deserialize, Serialize};

use super::{doc, guard_failure, Portal};
use crate::access::{max_visible_tier, Action};
use crate::error::{PortalError, Result};
use crate::ids::{AttachmentId, PrincipalId, ResourceId, TaxonomyNodeId};
use crate::model::{
    Actor, Attachment, AttachmentKind, Page, Resource, ResourceDraft, ResourcePatch, ResourceQuery, ResourceSummary,
    Revision, SortDir, SortField, MAX_PAGE_LIMIT,
};

/// A resource together with its attachment records, in attachment order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceDetail {
    pub resource: Resource,
    pub attachments: Vec<Attachment>,
}

pub(crate) fn revision_key(id: ResourceId, index: u64) -> String {
    format!("{id}/{index:010}")
}

const MAX_FILENAME_CHARS: usize = 255;

impl Portal {
    pub fn create_resource(&self, draft: ResourceDraft, actor: &Actor) -> Result<Resource> {
        self.check(actor, Action::Write, draft.tier)?;
        self.check_taxonomy_ids(&draft.taxonomy_ids)?;
        belnet_markup::parse(&draft.body)?;

        let now = self.now();
        let resource = Resource {
            id: ResourceId::random(),
            tier: draft.tier,
            title: draft.title,
            body: draft.body,
            taxonomy_ids: draft.taxonomy_ids,
            attachment_ids: Vec::new(),
            current_revision: 0,
            created_at: now,
            updated_at: now,
            archived: false,
        };
        let rev = Revision {
            resource_id: resource.id,
            index: 0,
            title: resource.title.clone(),
            body: resource.body.clone(),
            author: author_of(actor),
            timestamp: now,
        };
        let key = resource.id.to_string();
        self.execute(
            TxnBatch::new()
                .expect_absent(Keyspace::Resources, &key)
                .put(Keyspace::Resources, &key, doc(&resource)?)
                .put(Keyspace::Revisions, revision_key(resource.id, 0), doc(&rev)?),
        )?;
        tracing::debug!(id = %resource.id, "resource created");
        Ok(resource)
    }

    pub fn get_resource(&self, id: ResourceId, actor: &Actor) -> Result<Resource> {
        let resource = self.resource(id)?;
        self.check(actor, Action::Read, resource.tier)?;
        Ok(resource)
    }

    pub fn resource_detail(&self, id: ResourceId, actor: &Actor) -> Result<ResourceDetail> {
        let resource = self.get_resource(id, actor)?;
        let attachments = resource
            .attachment_ids
            .iter()
            .map(|a| {
                self.load(Keyspace::Attachments, &a.to_string())?
                    .ok_or_else(|| PortalError::NotFound(format!("attachment {a}")))
            })
            .collect::<Result<_>>()?;
        Ok(ResourceDetail { resource, attachments })
    }

    pub fn update_resource(
        &self,
        id: ResourceId,
        patch: ResourcePatch,
        expected_revision: u64,
        actor: &Actor,
    ) -> Result<Resource> {
        if let Some(body) = &patch.body {
            belnet_markup::parse(body)?;
        }
        if let Some(ids) = &patch.taxonomy_ids {
            self.check_taxonomy_ids(ids)?;
        }
        let key = id.to_string();
        loop {
            let (old, hash) = self.live_resource(id)?;
            self.check(actor, Action::Write, old.tier.max(patch.tier.unwrap_or(old.tier)))?;
            if old.current_revision != expected_revision {
                return Err(PortalError::RevisionConflict {
                    expected: expected_revision,
                    current: old.current_revision,
                });
            }

            let now = self.now();
            let mut new = old.clone();
            if let Some(t) = &patch.title {
                new.title = t.clone();
            }
            if let Some(b) = &patch.body {
                new.body = b.clone();
            }
            if let Some(t) = patch.tier {
                new.tier = t;
            }
            if let Some(ids) = &patch.taxonomy_ids {
                new.taxonomy_ids = ids.clone();
            }
            new.current_revision += 1;
            new.updated_at = now;
            let rev = Revision {
                resource_id: id,
                index: new.current_revision,
                title: new.title.clone(),
                body: new.body.clone(),
                author: author_of(actor),
                timestamp: now,
            };
            let rev_key = revision_key(id, rev.index);
            let batch = TxnBatch::new()
                .expect_hash(Keyspace::Resources, &key, hash)
                .expect_absent(Keyspace::Revisions, &rev_key)
                .put(Keyspace::Resources, &key, doc(&new)?)
                .put(Keyspace::Revisions, rev_key, doc(&rev)?);
            match self.execute(batch) {
                Ok(()) => return Ok(new),
                // Someone else committed in between; the re-read decides
                // between a conflict and a harmless retry.
                Err(e) if guard_failure(&e).is_some() => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn archive_resource(&self, id: ResourceId, actor: &Actor) -> Result<Resource> {
        let key = id.to_string();
        loop {
            let (mut r, hash) =
                self.load_hashed::<Resource>(Keyspace::Resources, &key)?.ok_or_else(|| not_found(id))?;
            self.check(actor, Action::Write, r.tier)?;
            if r.archived {
                return Ok(r);
            }
            r.archived = true;
            r.updated_at = self.now();
            let batch =
                TxnBatch::new().expect_hash(Keyspace::Resources, &key, hash).put(Keyspace::Resources, &key, doc(&r)?);
            match self.execute(batch) {
                Ok(()) => return Ok(r),
                Err(e) if guard_failure(&e).is_some() => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn revision_history(&self, id: ResourceId, actor: &Actor) -> Result<Vec<Revision>> {
        let r = self.get_resource(id, actor)?;
        let mut revs: Vec<Revision> = self.scan(Keyspace::Revisions, &format!("{id}/"))?;
        // A concurrent update may land between the two reads.
        revs.truncate(r.current_revision as usize + 1);
        Ok(revs)
    }

    pub fn query_resources(&self, q: &ResourceQuery, actor: &Actor) -> Result<Page<ResourceSummary>> {
        if q.limit == 0 || q.limit > MAX_PAGE_LIMIT {
            return Err(PortalError::InvalidQuery(format!("limit must be between 1 and {MAX_PAGE_LIMIT}")));
        }
        let ceiling = q.tier_ceiling.min(max_visible_tier(&actor.role));
        let subtree = match q.taxonomy_filter {
            Some(node) => Some(
                self.subtree(node).map_err(|_| PortalError::InvalidQuery(format!("unknown taxonomy node {node}")))?,
            ),
            None => None,
        };
        let needle = q.text_filter.as_deref().map(str::to_lowercase).filter(|s| !s.is_empty());

        let mut hits: Vec<Resource> = self
            .scan::<Resource>(Keyspace::Resources, "")?
            .into_iter()
            .filter(|r| r.tier <= ceiling)
            .filter(|r| q.include_archived || !r.archived)
            .filter(|r| match &subtree {
                Some(s) => r.taxonomy_ids.iter().any(|t| s.contains(t)),
                None => true,
            })
            .filter(|r| match &needle {
                Some(n) => r.title.to_lowercase().contains(n) || r.body.to_lowercase().contains(n),
                None => true,
            })
            .collect();
        hits.sort_by(|a, b| resource_order(a, b, q.sort_field, q.sort_dir));

        let total_count = hits.len();
        let items = hits.iter().skip(q.offset).take(q.limit).map(ResourceSummary::from).collect();
        Ok(Page { items, total_count, offset: q.offset, limit: q.limit })
    }

    pub fn attach_file(
        &self,
        resource_id: ResourceId,
        kind: AttachmentKind,
        media_type: &str,
        filename: &str,
        bytes: &[u8],
        actor: &Actor,
    ) -> Result<Attachment> {
        let (probe, _) = self.live_resource(resource_id)?;
        self.check(actor, Action::Write, probe.tier)?;
        let size = bytes.len() as u64;
        if size > self.config.max_attachment_bytes {
            return Err(PortalError::PayloadTooLarge { size, limit: self.config.max_attachment_bytes });
        }
        let media_type = validate_media_type(media_type)?;
        let filename = sanitize_filename(filename);

        let blob_ref = self.store.store_blob(bytes)?;
        let attachment = Attachment {
            id: AttachmentId::random(),
            resource_id,
            kind,
            media_type,
            filename,
            size_bytes: blob_ref.size_bytes,
            blob_ref,
        };
        let key = resource_id.to_string();
        let att_key = attachment.id.to_string();
        loop {
            let (mut r, hash) = self.live_resource(resource_id)?;
            self.check(actor, Action::Write, r.tier)?;
            r.attachment_ids.push(attachment.id);
            r.updated_at = self.now();
            let batch = TxnBatch::new()
                .expect_hash(Keyspace::Resources, &key, hash)
                .expect_absent(Keyspace::Attachments, &att_key)
                .put(Keyspace::Attachments, &att_key, doc(&attachment)?)
                .put(Keyspace::Resources, &key, doc(&r)?);
            match self.execute(batch) {
                Ok(()) => return Ok(attachment),
                Err(e) if guard_failure(&e).is_some() => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }

    /// The attachment record and its verified bytes.
    pub fn get_attachment(&self, id: AttachmentId, actor: &Actor) -> Result<(Attachment, Vec<u8>)> {
        let a: Attachment = self
            .load(Keyspace::Attachments, &id.to_string())?
            .ok_or_else(|| PortalError::NotFound(format!("attachment {id}")))?;
        self.get_resource(a.resource_id, actor)?;
        let bytes = self.store.fetch_blob(&a.blob_ref)?;
        Ok((a, bytes))
    }

    pub fn assign_resource(&self, resource_id: ResourceId, node_id: TaxonomyNodeId, actor: &Actor) -> Result<Resource> {
        let key = resource_id.to_string();
        loop {
            let (mut r, hash) = self.live_resource(resource_id)?;
            self.check(actor, Action::Write, r.tier)?;
            self.check_taxonomy_ids(&BTreeSet::from([node_id]))?;
            if !r.taxonomy_ids.insert(node_id) {
                return Ok(r);
            }
            r.updated_at = self.now();
            let batch =
                TxnBatch::new().expect_hash(Keyspace::Resources, &key, hash).put(Keyspace::Resources, &key, doc(&r)?);
            match self.execute(batch) {
                Ok(()) => return Ok(r),
                Err(e) if guard_failure(&e).is_some() => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }

    fn resource(&self, id: ResourceId) -> Result<Resource> {
        self.load(Keyspace::Resources, &id.to_string())?.ok_or_else(|| not_found(id))
    }

    /// A resource that exists and is not archived, with its record hash.
    fn live_resource(&self, id: ResourceId) -> Result<(Resource, belnet_store::ValueHash)> {
        match self.load_hashed::<Resource>(Keyspace::Resources, &id.to_string())? {
            Some((r, h)) if !r.archived => Ok((r, h)),
            _ => Err(not_found(id)),
        }
    }

    fn check_taxonomy_ids(&self, ids: &BTreeSet<TaxonomyNodeId>) -> Result<()> {
        for id in ids {
            if self.taxonomy_node(*id)?.is_none() {
                return Err(PortalError::UnknownTaxonomyNode(id.to_string()));
            }
        }
        Ok(())
    }
}

fn not_found(id: ResourceId) -> PortalError {
    PortalError::NotFound(format!("resource {id}"))
}

fn author_of(actor: &Actor) -> PrincipalId {
    actor.principal.unwrap_or(PrincipalId(uuid::Uuid::nil()))
}

/// Titles compare case-insensitively first, then exactly; ties fall back to
/// ascending id whatever the direction.
fn resource_order(a: &Resource, b: &Resource, field: SortField, dir: SortDir) -> Ordering {
    let primary = match field {
        SortField::Title => a.title.to_lowercase().cmp(&b.title.to_lowercase()).then_with(|| a.title.cmp(&b.title)),
        SortField::UpdatedAt => a.updated_at.cmp(&b.updated_at),
        SortField::CreatedAt => a.created_at.cmp(&b.created_at),
    };
    let primary = match dir {
        SortDir::Asc => primary,
        SortDir::Desc => primary.reverse(),
    };
    primary.then_with(|| a.id.cmp(&b.id))
}

fn validate_media_type(m: &str) -> Result<String> {
    let m = m.trim();
    let ok = m.split_once('/').is_some_and(|(t, s)| {
        let tok = |x: &str| !x.is_empty() && x.bytes().all(|b| b.is_ascii_alphanumeric() || b"!#$&^_.+-".contains(&b));
        let s = s.split(';').next().unwrap_or("").trim();
        tok(t) && tok(s)
    });
    if ok && !m.chars().any(char::is_control) {
        Ok(m.to_ascii_lowercase())
    } else {
        Err(PortalError::InvalidInput(format!("bad media type {m:?}")))
    }
}

/// Keeps the last path component and drops control characters.
fn sanitize_filename(name: &str) -> String {
    let base = name.rsplit(['/', '\\']).next().unwrap_or("");
    let clean: String = base.chars().filter(|c| !c.is_control()).take(MAX_FILENAME_CHARS).collect();
    match clean.trim() {
        "" | "." | ".." => "attachment".into(),
        s => s.to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filenames() {
        assert_eq!(sanitize_filename("../../etc/passwd"), "passwd");
        assert_eq!(sanitize_filename("C:\\x\\spec.txt"), "spec.txt");
        assert_eq!(sanitize_filename("a\u{0}b\n.png"), "ab.png");
        assert_eq!(sanitize_filename(".."), "attachment");
        assert_eq!(sanitize_filename(""), "attachment");
    }

    #[test]
    fn media_types() {
        assert_eq!(validate_media_type("Image/PNG").unwrap(), "image/png");
        assert!(validate_media_type("text/plain; charset=utf-8").is_ok());
        assert!(validate_media_type("png").is_err());
        assert!(validate_media_type("text/<b>").is_err());
        assert!(validate_media_type("/x").is_err());
    }
}

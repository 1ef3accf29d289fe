//! Records of the content model and the account model.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use belnet_store::BlobRef;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::access::{AccessTier, Role, Tiered};
use crate::error::PortalError;
use crate::ids::{AttachmentId, PrincipalId, ResourceId, TaxonomyNodeId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resource {
    pub id: ResourceId,
    pub tier: AccessTier,
    pub title: String,
    pub body: String,
    pub taxonomy_ids: BTreeSet<TaxonomyNodeId>,
    pub attachment_ids: Vec<AttachmentId>,
    pub current_revision: u64,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub archived: bool,
}

impl Tiered for Resource {
    fn tier(&self) -> AccessTier {
        self.tier
    }
}

impl Tiered for &Resource {
    fn tier(&self) -> AccessTier {
        self.tier
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceSummary {
    pub id: ResourceId,
    pub tier: AccessTier,
    pub title: String,
    pub taxonomy_ids: BTreeSet<TaxonomyNodeId>,
    pub current_revision: u64,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub archived: bool,
}

impl From<&Resource> for ResourceSummary {
    fn from(r: &Resource) -> Self {
        Self {
            id: r.id,
            tier: r.tier,
            title: r.title.clone(),
            taxonomy_ids: r.taxonomy_ids.clone(),
            current_revision: r.current_revision,
            created_at: r.created_at,
            updated_at: r.updated_at,
            archived: r.archived,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub resource_id: ResourceId,
    pub index: u64,
    pub title: String,
    pub body: String,
    pub author: PrincipalId,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceDraft {
    pub title: String,
    pub body: String,
    pub tier: AccessTier,
    #[serde(default)]
    pub taxonomy_ids: BTreeSet<TaxonomyNodeId>,
}

/// Fields left as `None` keep their current value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourcePatch {
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub body: Option<String>,
    #[serde(default)]
    pub tier: Option<AccessTier>,
    #[serde(default)]
    pub taxonomy_ids: Option<BTreeSet<TaxonomyNodeId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttachmentKind {
    File,
    ReferenceLink,
    Video,
    Photo,
    Picture,
}

impl AttachmentKind {
    pub const ALL: [AttachmentKind; 5] = [
        AttachmentKind::File,
        AttachmentKind::ReferenceLink,
        AttachmentKind::Video,
        AttachmentKind::Photo,
        AttachmentKind::Picture,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttachmentKind::File => "file",
            AttachmentKind::ReferenceLink => "reference-link",
            AttachmentKind::Video => "video",
            AttachmentKind::Photo => "photo",
            AttachmentKind::Picture => "picture",
        }
    }
}

impl fmt::Display for AttachmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttachmentKind {
    type Err = PortalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| PortalError::UnknownKind(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub id: AttachmentId,
    pub resource_id: ResourceId,
    pub kind: AttachmentKind,
    pub media_type: String,
    pub filename: String,
    pub blob_ref: BlobRef,
    pub size_bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlossaryEntry {
    pub term: String,
    pub definition: String,
    #[serde(default)]
    pub application_area: String,
    #[serde(default)]
    pub deviation_notes: String,
    #[serde(default)]
    pub source_refs: Vec<String>,
}

/// The uniqueness key of a glossary term: case folded, inner whitespace
/// collapsed to single spaces, ends trimmed.
pub fn glossary_key(term: &str) -> String {
    term.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyNode {
    pub id: TaxonomyNodeId,
    pub parent_id: Option<TaxonomyNodeId>,
    pub label: String,
    pub sort_key: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortField {
    #[default]
    Title,
    UpdatedAt,
    CreatedAt,
}

impl FromStr for SortField {
    type Err = PortalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "title" => Ok(SortField::Title),
            "updated_at" => Ok(SortField::UpdatedAt),
            "created_at" => Ok(SortField::CreatedAt),
            _ => Err(PortalError::InvalidQuery(format!("unknown sort field {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortDir {
    #[default]
    Asc,
    Desc,
}

impl FromStr for SortDir {
    type Err = PortalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asc" => Ok(SortDir::Asc),
            "desc" => Ok(SortDir::Desc),
            _ => Err(PortalError::InvalidQuery(format!("unknown sort direction {s:?}"))),
        }
    }
}

pub const DEFAULT_PAGE_LIMIT: usize = 50;
pub const MAX_PAGE_LIMIT: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceQuery {
    /// Upper bound on tiers returned; clamped to what the actor may see.
    pub tier_ceiling: AccessTier,
    /// Restrict to resources under this node or any of its descendants.
    pub taxonomy_filter: Option<TaxonomyNodeId>,
    /// Case-insensitive substring of title or body source.
    pub text_filter: Option<String>,
    pub sort_field: SortField,
    pub sort_dir: SortDir,
    pub offset: usize,
    pub limit: usize,
    pub include_archived: bool,
}

impl Default for ResourceQuery {
    fn default() -> Self {
        Self {
            tier_ceiling: AccessTier::Restricted,
            taxonomy_filter: None,
            text_filter: None,
            sort_field: SortField::Title,
            sort_dir: SortDir::Asc,
            offset: 0,
            limit: DEFAULT_PAGE_LIMIT,
            include_archived: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub total_count: usize,
    pub offset: usize,
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Principal {
    pub id: PrincipalId,
    pub username: String,
    pub credential_hash: String,
    pub role: Role,
    pub active: bool,
}

/// What callers outside the store see of a principal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrincipalInfo {
    pub id: PrincipalId,
    pub username: String,
    pub role: Role,
    pub active: bool,
}

impl From<&Principal> for PrincipalInfo {
    fn from(p: &Principal) -> Self {
        Self { id: p.id, username: p.username.clone(), role: p.role, active: p.active }
    }
}

/// A freshly issued session. The token is only ever shown here; the store
/// keeps its digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub token: String,
    pub principal_id: PrincipalId,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

/// Who is making a call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub principal: Option<PrincipalId>,
    pub username: Option<String>,
    pub role: Role,
}

impl Actor {
    pub fn anonymous() -> Self {
        Self { principal: None, username: None, role: Role::Anonymous }
    }

    /// The operator acting directly on the store, e.g. from the command line.
    pub fn system() -> Self {
        Self {
            principal: Some(PrincipalId(uuid::Uuid::nil())),
            username: Some("system".into()),
            role: Role::SystemAdmin,
        }
    }

    pub fn of(p: &Principal) -> Self {
        Self { principal: Some(p.id), username: Some(p.username.clone()), role: p.role }
    }

    pub fn is_anonymous(&self) -> bool {
        self.role == Role::Anonymous
    }
}

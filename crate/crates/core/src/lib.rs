//! Access control and the versioned content model of the portal.
//!
//! [`Portal`] is the entry point. Every mutating call takes the acting
//! [`Actor`], checks it with [`authorize`], and commits through a guarded
//! store transaction, so concurrent callers see either a clean success or a
//! [`PortalError::RevisionConflict`], never a lost update.
//!
//! ```
//! use std::sync::Arc;
//! use belnet_core::{AccessTier, Actor, Portal, PortalConfig, ResourceDraft, ResourcePatch};
//!
//! let dir = tempfile::tempdir().unwrap();
//! let store = Arc::new(belnet_store::Store::open(dir.path()).unwrap());
//! let portal = Portal::new(store, PortalConfig::default());
//! let admin = Actor::system();
//!
//! let draft = ResourceDraft {
//!     title: "Attenuation".into(),
//!     body: "$N = N_0 \\exp{-\\mu d}$".into(),
//!     tier: AccessTier::Open,
//!     ..Default::default()
//! };
//! let r = portal.create_resource(draft, &admin).unwrap();
//! let patch = ResourcePatch { title: Some("Gamma attenuation".into()), ..Default::default() };
//! let r = portal.update_resource(r.id, patch, 0, &admin).unwrap();
//! assert_eq!(r.current_revision, 1);
//! assert_eq!(portal.revision_history(r.id, &Actor::anonymous()).unwrap().len(), 2);
//! ```

mod access;
mod bundle;
mod clock;
mod error;
mod ids;
mod model;
mod password;
mod portal;

pub use access::{authorize, filter_visible, max_visible_tier, AccessTier, Action, Decision, DenyReason, Role, Tiered};
pub use bundle::{BundleManifest, BundleSummary, BLOB_DIR, BUNDLE_FORMAT, BUNDLE_VERSION, MANIFEST_FILE};
pub use clock::{Clock, ManualClock, SystemClock};
pub use error::{PortalError, Result};
pub use ids::{AttachmentId, PrincipalId, ResourceId, TaxonomyNodeId};
pub use model::{
    glossary_key, Actor, Attachment, AttachmentKind, GlossaryEntry, Page, Principal, PrincipalInfo, Resource,
    ResourceDraft, ResourcePatch, ResourceQuery, ResourceSummary, Revision, Session, SortDir, SortField, TaxonomyNode,
    DEFAULT_PAGE_LIMIT, MAX_PAGE_LIMIT,
};
pub use password::{hash_password, verify_password, PasswordParams};
pub use portal::{Portal, PortalConfig, ResourceDetail, DEFAULT_MAX_ATTACHMENT_BYTES};

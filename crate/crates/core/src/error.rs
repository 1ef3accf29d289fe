use belnet_markup::ParseError;
use belnet_store::StoreError;
use thiserror::Error;

use crate::access::DenyReason;

#[derive(Debug, Error)]
pub enum PortalError {
    #[error("not allowed: {}", .0.code())]
    AuthorizationDenied(DenyReason),
    #[error("{0} not found")]
    NotFound(String),
    #[error("stale revision: expected {expected}, current is {current}")]
    RevisionConflict { expected: u64, current: u64 },
    #[error("markup error: {0}")]
    Markup(#[from] ParseError),
    #[error("unknown taxonomy node {0}")]
    UnknownTaxonomyNode(String),
    #[error("payload of {size} bytes exceeds the limit of {limit}")]
    PayloadTooLarge { size: u64, limit: u64 },
    #[error("unknown attachment kind {0:?}")]
    UnknownKind(String),
    #[error("glossary term is empty")]
    EmptyTerm,
    #[error("a sibling already has the label {0:?}")]
    DuplicateSiblingLabel(String),
    #[error("move would create a cycle")]
    CycleRejected,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid credentials")]
    InvalidCredentials,
    #[error("account is inactive")]
    AccountInactive,
    #[error("username {0:?} is taken")]
    DuplicateUsername(String),
    #[error("bundle conflict: {0}")]
    BundleConflict(String),
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl PortalError {
    /// Stable snake_case code for APIs and logs.
    pub fn code(&self) -> &'static str {
        match self {
            PortalError::AuthorizationDenied(_) => "authorization_denied",
            PortalError::NotFound(_) => "not_found",
            PortalError::RevisionConflict { .. } => "revision_conflict",
            PortalError::Markup(_) => "markup_error",
            PortalError::UnknownTaxonomyNode(_) => "unknown_taxonomy_node",
            PortalError::PayloadTooLarge { .. } => "payload_too_large",
            PortalError::UnknownKind(_) => "unknown_kind",
            PortalError::EmptyTerm => "empty_term",
            PortalError::DuplicateSiblingLabel(_) => "duplicate_sibling_label",
            PortalError::CycleRejected => "cycle_rejected",
            PortalError::InvalidQuery(_) => "invalid_query",
            PortalError::InvalidInput(_) => "invalid_input",
            PortalError::InvalidCredentials => "invalid_credentials",
            PortalError::AccountInactive => "account_inactive",
            PortalError::DuplicateUsername(_) => "duplicate_username",
            PortalError::BundleConflict(_) => "bundle_conflict",
            PortalError::InvalidBundle(_) => "invalid_bundle",
            PortalError::Store(_) => "storage_error",
        }
    }
}

pub type Result<T, E = PortalError> = std::result::Result<T, E>;

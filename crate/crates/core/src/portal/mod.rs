//! The portal service: every content and account operation, enforced
//! against the access rules and committed through store transactions.

mod accounts;
mod glossary;
mod resources;
mod taxonomy;

use std::sync::{Arc, OnceLock};

use belnet_store::{Document, Keyspace, Store, StoreError, TxnBatch, ValueHash};
use chrono::{DateTime, Duration, Utc};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::access::{authorize, AccessTier, Action, Decision};
use crate::clock::{Clock, SystemClock};
use crate::error::{PortalError, Result};
use crate::model::Actor;
use crate::password::PasswordParams;

pub(crate) use resources::revision_key;
pub use resources::ResourceDetail;
pub(crate) use taxonomy::{child_key, node_key, ChildIndex};

pub(crate) const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_MAX_ATTACHMENT_BYTES: u64 = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct PortalConfig {
    pub max_attachment_bytes: u64,
    pub session_lifetime: Duration,
    pub password: PasswordParams,
}

impl Default for PortalConfig {
    fn default() -> Self {
        Self {
            max_attachment_bytes: DEFAULT_MAX_ATTACHMENT_BYTES,
            session_lifetime: Duration::hours(12),
            password: PasswordParams::default(),
        }
    }
}

pub struct Portal {
    store: Arc<Store>,
    config: PortalConfig,
    clock: Arc<dyn Clock>,
    dummy_verifier: OnceLock<String>,
}

impl Portal {
    pub fn new(store: Arc<Store>, config: PortalConfig) -> Self {
        Self::with_clock(store, config, Arc::new(SystemClock))
    }

    pub fn with_clock(store: Arc<Store>, config: PortalConfig, clock: Arc<dyn Clock>) -> Self {
        Self { store, config, clock, dummy_verifier: OnceLock::new() }
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    pub fn config(&self) -> &PortalConfig {
        &self.config
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    pub(crate) fn check(&self, actor: &Actor, action: Action, tier: AccessTier) -> Result<()> {
        match authorize(&actor.role, action, tier) {
            Decision::Allow => Ok(()),
            Decision::Deny(reason) => Err(PortalError::AuthorizationDenied(reason)),
        }
    }

    pub(crate) fn load<T: DeserializeOwned>(&self, ks: Keyspace, key: &str) -> Result<Option<T>> {
        Ok(self.load_hashed(ks, key)?.map(|(v, _)| v))
    }

    pub(crate) fn load_hashed<T: DeserializeOwned>(&self, ks: Keyspace, key: &str) -> Result<Option<(T, ValueHash)>> {
        match self.store.get_with_hash(ks, key) {
            Some((doc, hash)) => Ok(Some((doc.to_value()?, hash))),
            None => Ok(None),
        }
    }

    pub(crate) fn scan<T: DeserializeOwned>(&self, ks: Keyspace, prefix: &str) -> Result<Vec<T>> {
        self.store.scan(ks, prefix).into_iter().map(|(_, doc)| Ok(doc.to_value()?)).collect()
    }

    pub(crate) fn execute(&self, batch: TxnBatch) -> Result<(), StoreError> {
        self.store.execute(batch)
    }
}

pub(crate) fn doc<T: Serialize>(value: &T) -> Result<Document> {
    Ok(Document::from_value(SCHEMA_VERSION, value)?)
}

/// The key of a guard that failed, if `e` is a guard failure.
pub(crate) fn guard_failure(e: &StoreError) -> Option<(Keyspace, &str)> {
    match e {
        StoreError::GuardFailed { keyspace, key } => Some((*keyspace, key.as_str())),
        _ => None,
    }
}

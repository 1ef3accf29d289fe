#![allow(dead_code)]

pub mod versioning;

use std::path::Path;
use std::sync::Arc;

use belnet_core::{
    AccessTier, Actor, ManualClock, PasswordParams, Portal, PortalConfig, PrincipalId, ResourceDraft, Role,
};
use belnet_store::Store;
use chrono::{TimeZone, Utc};
use tempfile::TempDir;

pub struct Fixture {
    pub dir: TempDir,
    pub portal: Portal,
    pub clock: Arc<ManualClock>,
}

pub fn config() -> PortalConfig {
    PortalConfig { password: PasswordParams::insecure_fast(), ..PortalConfig::default() }
}

pub fn fixture() -> Fixture {
    fixture_with(config())
}

pub fn fixture_with(config: PortalConfig) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let (portal, clock) = open_portal(dir.path(), config);
    Fixture { dir, portal, clock }
}

pub fn open_portal(path: &Path, config: PortalConfig) -> (Portal, Arc<ManualClock>) {
    let store = Arc::new(Store::open(path).unwrap());
    let clock = Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2024, 3, 1, 9, 0, 0).unwrap()));
    (Portal::with_clock(store, config, clock.clone()), clock)
}

/// An actor with the given role that has no stored principal behind it.
pub fn actor(role: Role) -> Actor {
    Actor { principal: Some(PrincipalId::random()), username: Some(role.to_string()), role }
}

pub fn draft(title: &str, body: &str, tier: AccessTier) -> ResourceDraft {
    ResourceDraft { title: title.into(), body: body.into(), tier, ..Default::default() }
}

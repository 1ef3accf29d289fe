//! Visibility tiers, roles and the authorization rule.
//!
//! Tiers are totally ordered `Open < Limited < Restricted`. A role can read
//! everything up to its ceiling; editors write up to theirs; the two admin
//! roles read and write everything and alone perform admin actions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessTier {
    #[default]
    Open = 0,
    Limited = 1,
    Restricted = 2,
}

impl AccessTier {
    pub const ALL: [AccessTier; 3] = [AccessTier::Open, AccessTier::Limited, AccessTier::Restricted];

    pub fn as_str(self) -> &'static str {
        match self {
            AccessTier::Open => "open",
            AccessTier::Limited => "limited",
            AccessTier::Restricted => "restricted",
        }
    }
}

impl fmt::Display for AccessTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccessTier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "open" | "0" => Ok(AccessTier::Open),
            "limited" | "1" => Ok(AccessTier::Limited),
            "restricted" | "2" => Ok(AccessTier::Restricted),
            _ => Err(format!("unknown access tier {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "tier", rename_all = "snake_case")]
pub enum Role {
    Anonymous,
    Reader(AccessTier),
    Editor(AccessTier),
    PortalAdmin,
    SystemAdmin,
}

impl Role {
    pub fn is_admin(&self) -> bool {
        matches!(self, Role::PortalAdmin | Role::SystemAdmin)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Anonymous => f.write_str("anonymous"),
            Role::Reader(t) => write!(f, "reader({t})"),
            Role::Editor(t) => write!(f, "editor({t})"),
            Role::PortalAdmin => f.write_str("portal_admin"),
            Role::SystemAdmin => f.write_str("system_admin"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Read,
    Write,
    Admin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenyReason {
    /// The subject's tier is above what the role may read.
    TierAboveClearance,
    /// The role cannot write at all.
    NotAnEditor,
    /// An editor whose ceiling is below the subject's tier.
    EditorTierTooLow,
    /// Admin actions need a portal or system administrator.
    NotAnAdmin,
}

impl DenyReason {
    pub fn code(self) -> &'static str {
        match self {
            DenyReason::TierAboveClearance => "tier_above_clearance",
            DenyReason::NotAnEditor => "not_an_editor",
            DenyReason::EditorTierTooLow => "editor_tier_too_low",
            DenyReason::NotAnAdmin => "not_an_admin",
        }
    }

    /// Whether the denial is about the role itself rather than a tier.
    pub fn is_insufficient_role(self) -> bool {
        matches!(self, DenyReason::NotAnEditor | DenyReason::NotAnAdmin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", content = "reason", rename_all = "snake_case")]
pub enum Decision {
    Allow,
    Deny(DenyReason),
}

impl Decision {
    pub fn is_allowed(self) -> bool {
        self == Decision::Allow
    }
}

pub fn max_visible_tier(role: &Role) -> AccessTier {
    match role {
        Role::Anonymous => AccessTier::Open,
        Role::Reader(t) | Role::Editor(t) => *t,
        Role::PortalAdmin | Role::SystemAdmin => AccessTier::Restricted,
    }
}

pub fn authorize(role: &Role, action: Action, subject_tier: AccessTier) -> Decision {
    use Decision::*;
    match action {
        Action::Read if subject_tier <= max_visible_tier(role) => Allow,
        Action::Read => Deny(DenyReason::TierAboveClearance),
        Action::Write => match role {
            Role::PortalAdmin | Role::SystemAdmin => Allow,
            Role::Editor(t) if subject_tier <= *t => Allow,
            Role::Editor(_) => Deny(DenyReason::EditorTierTooLow),
            Role::Anonymous | Role::Reader(_) => Deny(DenyReason::NotAnEditor),
        },
        Action::Admin if role.is_admin() => Allow,
        Action::Admin => Deny(DenyReason::NotAnAdmin),
    }
}

/// Anything carrying an access tier.
pub trait Tiered {
    fn tier(&self) -> AccessTier;
}

/// Keeps the items `role` may read, in their original order.
pub fn filter_visible<T: Tiered>(role: &Role, items: impl IntoIterator<Item = T>) -> Vec<T> {
    let ceiling = max_visible_tier(role);
    items.into_iter().filter(|r| r.tier() <= ceiling).collect()
}

use belnet_store::{Keyspace, TxnBatch};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{doc, guard_failure, Portal};
use crate::access::{AccessTier, Action, DenyReason, Role};
use crate::error::{PortalError, Result};
use crate::ids::PrincipalId;
use crate::model::{Actor, Principal, PrincipalInfo, Session};
use crate::password::{hash_password, verify_password};

const TOKEN_BYTES: usize = 32;
const MAX_USERNAME_CHARS: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoredSession {
    principal_id: PrincipalId,
    issued_at: DateTime<Utc>,
    expires_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NameIndex {
    id: PrincipalId,
}

fn id_key(id: PrincipalId) -> String {
    format!("id/{id}")
}

fn name_key(username: &str) -> String {
    format!("name/{}", username.to_lowercase())
}

/// Sessions are stored under the digest of their token, never the token.
fn session_key(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

fn validate_username(u: &str) -> Result<&str> {
    let u = u.trim();
    let ok = !u.is_empty()
        && u.chars().count() <= MAX_USERNAME_CHARS
        && !u.chars().any(|c| c.is_whitespace() || c.is_control() || c == '/');
    if ok {
        Ok(u)
    } else {
        Err(PortalError::InvalidInput(format!(
            "username must be 1 to {MAX_USERNAME_CHARS} characters without spaces or slashes"
        )))
    }
}

impl Portal {
    pub fn create_principal(&self, username: &str, password: &str, role: Role, actor: &Actor) -> Result<PrincipalInfo> {
        self.check(actor, Action::Admin, AccessTier::Open)?;
        if role == Role::SystemAdmin && actor.role != Role::SystemAdmin {
            return Err(PortalError::AuthorizationDenied(DenyReason::NotAnAdmin));
        }
        self.insert_principal(username, password, role)
    }

    /// Creates the first portal administrator when no principal exists yet.
    /// Returns `None` if the store already has accounts.
    pub fn bootstrap_admin(&self, username: &str, password: &str) -> Result<Option<PrincipalInfo>> {
        if self.store.count(Keyspace::Principals) > 0 {
            return Ok(None);
        }
        self.insert_principal(username, password, Role::PortalAdmin).map(Some)
    }

    fn insert_principal(&self, username: &str, password: &str, role: Role) -> Result<PrincipalInfo> {
        let username = validate_username(username)?;
        if password.is_empty() {
            return Err(PortalError::InvalidInput("password is empty".into()));
        }
        let p = Principal {
            id: PrincipalId::random(),
            username: username.to_owned(),
            credential_hash: hash_password(password, &self.config.password),
            role,
            active: true,
        };
        let nk = name_key(username);
        let batch = TxnBatch::new()
            .expect_absent(Keyspace::Principals, &nk)
            .put(Keyspace::Principals, &nk, doc(&NameIndex { id: p.id })?)
            .put(Keyspace::Principals, id_key(p.id), doc(&p)?);
        match self.execute(batch) {
            Ok(()) => Ok(PrincipalInfo::from(&p)),
            Err(e) if guard_failure(&e).is_some() => Err(PortalError::DuplicateUsername(username.to_owned())),
            Err(e) => Err(e.into()),
        }
    }

    pub fn list_principals(&self, actor: &Actor) -> Result<Vec<PrincipalInfo>> {
        self.check(actor, Action::Admin, AccessTier::Open)?;
        let all: Vec<Principal> = self.scan(Keyspace::Principals, "id/")?;
        let mut out: Vec<PrincipalInfo> = all.iter().map(PrincipalInfo::from).collect();
        out.sort_by_key(|p| p.username.to_lowercase());
        Ok(out)
    }

    pub fn set_principal_active(&self, username: &str, active: bool, actor: &Actor) -> Result<PrincipalInfo> {
        self.check(actor, Action::Admin, AccessTier::Open)?;
        loop {
            let (mut p, hash) = self
                .principal_by_name(username)?
                .ok_or_else(|| PortalError::NotFound(format!("principal {username:?}")))?;
            if p.role == Role::SystemAdmin && actor.role != Role::SystemAdmin {
                return Err(PortalError::AuthorizationDenied(DenyReason::NotAnAdmin));
            }
            p.active = active;
            let key = id_key(p.id);
            let batch =
                TxnBatch::new().expect_hash(Keyspace::Principals, &key, hash).put(Keyspace::Principals, &key, doc(&p)?);
            match self.execute(batch) {
                Ok(()) => return Ok(PrincipalInfo::from(&p)),
                Err(e) if guard_failure(&e).is_some() => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }

    fn principal_by_name(&self, username: &str) -> Result<Option<(Principal, belnet_store::ValueHash)>> {
        let Some(idx) = self.load::<NameIndex>(Keyspace::Principals, &name_key(username.trim()))? else {
            return Ok(None);
        };
        self.load_hashed(Keyspace::Principals, &id_key(idx.id))
    }

    /// Verifies a username/password pair and issues a session. Unknown users
    /// and wrong passwords fail identically and take comparable time.
    pub fn authenticate(&self, username: &str, password: &str) -> Result<Session> {
        let principal = self.principal_by_name(username)?.map(|(p, _)| p);
        let verifier = match &principal {
            Some(p) => p.credential_hash.as_str(),
            None => self.dummy_verifier.get_or_init(|| hash_password("\u{0}no-such-user", &self.config.password)),
        };
        let matches = verify_password(password, verifier, &self.config.password);
        let principal = match principal {
            Some(p) if matches => p,
            _ => return Err(PortalError::InvalidCredentials),
        };
        if !principal.active {
            return Err(PortalError::AccountInactive);
        }

        let token = hex::encode(rand::random::<[u8; TOKEN_BYTES]>());
        let issued_at = self.now();
        let stored = StoredSession {
            principal_id: principal.id,
            issued_at,
            expires_at: issued_at + self.config.session_lifetime,
        };
        let key = session_key(&token);
        self.execute(TxnBatch::new().expect_absent(Keyspace::Sessions, &key).put(
            Keyspace::Sessions,
            &key,
            doc(&stored)?,
        ))?;
        Ok(Session { token, principal_id: principal.id, issued_at, expires_at: stored.expires_at })
    }

    /// The actor behind a bearer token. Unknown, expired or revoked tokens
    /// and deactivated accounts all resolve to the anonymous actor.
    pub fn resolve_token(&self, token: Option<&str>) -> Actor {
        self.try_resolve(token).unwrap_or_else(Actor::anonymous)
    }

    fn try_resolve(&self, token: Option<&str>) -> Option<Actor> {
        let token = token.filter(|t| !t.is_empty())?;
        let s: StoredSession = self.load(Keyspace::Sessions, &session_key(token)).ok()??;
        if self.now() >= s.expires_at {
            return None;
        }
        let p: Principal = self.load(Keyspace::Principals, &id_key(s.principal_id)).ok()??;
        p.active.then(|| Actor::of(&p))
    }

    /// Invalidates a token. Unknown tokens are ignored.
    pub fn revoke_session(&self, token: &str) -> Result<()> {
        let key = session_key(token);
        if self.store.get(Keyspace::Sessions, &key).is_some() {
            self.execute(TxnBatch::new().delete(Keyspace::Sessions, key))?;
        }
        Ok(())
    }

    /// Drops expired session records; returns how many were removed.
    pub fn purge_expired_sessions(&self) -> Result<usize> {
        let now = self.now();
        let mut batch = TxnBatch::new();
        let mut n = 0;
        for (key, d) in self.store.scan(Keyspace::Sessions, "") {
            let s: StoredSession = d.to_value()?;
            if now >= s.expires_at {
                batch = batch.delete(Keyspace::Sessions, key);
                n += 1;
            }
        }
        if n > 0 {
            self.execute(batch)?;
        }
        Ok(n)
    }
}

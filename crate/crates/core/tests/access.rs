mod support;

use belnet_core::{
    authorize, filter_visible, max_visible_tier, AccessTier, Action, Decision, DenyReason, PortalConfig, PortalError,
    Role, Tiered,
};
use chrono::Duration;
use proptest::prelude::*;

use support::{actor, fixture, fixture_with};
use AccessTier::*;

/// The expected decision, written out case by case.
fn expected(role: Role, action: Action, tier: AccessTier) -> bool {
    match (role, action) {
        (Role::Anonymous, Action::Read) => tier == Open,
        (Role::Anonymous, Action::Write) => false,
        (Role::Reader(Limited), Action::Read) => tier != Restricted,
        (Role::Reader(_), Action::Write) => false,
        (Role::Editor(Restricted), _) => true,
        (Role::PortalAdmin | Role::SystemAdmin, _) => true,
        other => unreachable!("{other:?} not in the table"),
    }
}

#[test]
fn decision_matrix() {
    let roles = [Role::Anonymous, Role::Reader(Limited), Role::Editor(Restricted), Role::PortalAdmin];
    let mut n = 0;
    for role in roles {
        for tier in AccessTier::ALL {
            for action in [Action::Read, Action::Write] {
                let d = authorize(&role, action, tier);
                assert_eq!(d.is_allowed(), expected(role, action, tier), "{role} {action:?} {tier}");
                n += 1;
            }
        }
    }
    assert_eq!(n, 24);
}

#[test]
fn denial_reasons() {
    assert_eq!(authorize(&Role::Anonymous, Action::Write, Open), Decision::Deny(DenyReason::NotAnEditor));
    assert_eq!(authorize(&Role::Reader(Restricted), Action::Admin, Open), Decision::Deny(DenyReason::NotAnAdmin));
    assert_eq!(authorize(&Role::Anonymous, Action::Read, Limited), Decision::Deny(DenyReason::TierAboveClearance));
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Item(u32, AccessTier);

impl Tiered for Item {
    fn tier(&self) -> AccessTier {
        self.1
    }
}

fn tier() -> impl Strategy<Value = AccessTier> {
    prop_oneof![Just(Open), Just(Limited), Just(Restricted)]
}

fn role() -> impl Strategy<Value = Role> {
    prop_oneof![
        Just(Role::Anonymous),
        tier().prop_map(Role::Reader),
        tier().prop_map(Role::Editor),
        Just(Role::PortalAdmin),
        Just(Role::SystemAdmin),
    ]
}

fn corpus() -> impl Strategy<Value = Vec<Item>> {
    prop::collection::vec((any::<u32>(), tier()).prop_map(|(i, t)| Item(i, t)), 0..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn visibility_is_monotone(items in corpus(), a in role(), b in role()) {
        let (lo, hi) = if max_visible_tier(&a) <= max_visible_tier(&b) { (a, b) } else { (b, a) };
        let small = filter_visible(&lo, items.clone());
        let big = filter_visible(&hi, items.clone());
        prop_assert!(small.iter().all(|x| big.contains(x)));
    }

    #[test]
    fn read_agrees_with_filter(items in corpus(), r in role()) {
        let kept = filter_visible(&r, items.clone());
        let by_rule: Vec<Item> = items
            .into_iter()
            .filter(|i| authorize(&r, Action::Read, i.1).is_allowed())
            .collect();
        prop_assert_eq!(kept, by_rule);
    }

    #[test]
    fn write_implies_read(r in role(), t in tier()) {
        if authorize(&r, Action::Write, t).is_allowed() {
            prop_assert!(authorize(&r, Action::Read, t).is_allowed());
        }
    }
}

#[test]
fn authenticate_and_resolve() {
    let f = fixture();
    let admin = f.portal.bootstrap_admin("root", "s3cret").unwrap().unwrap();
    assert_eq!(admin.role, Role::PortalAdmin);
    assert!(f.portal.bootstrap_admin("other", "x").unwrap().is_none());

    let s = f.portal.authenticate("root", "s3cret").unwrap();
    assert_eq!(s.expires_at - s.issued_at, Duration::hours(12));
    assert!(s.token.len() >= 32);
    let a = f.portal.resolve_token(Some(&s.token));
    assert_eq!(a.role, Role::PortalAdmin);
    assert_eq!(a.principal, Some(admin.id));

    // Usernames match case-insensitively.
    assert!(f.portal.authenticate("ROOT", "s3cret").is_ok());
}

#[test]
fn bad_credentials_look_alike() {
    let f = fixture();
    f.portal.bootstrap_admin("root", "s3cret").unwrap();
    let wrong_pw = f.portal.authenticate("root", "nope").unwrap_err();
    let wrong_user = f.portal.authenticate("nobody", "s3cret").unwrap_err();
    assert!(matches!(wrong_pw, PortalError::InvalidCredentials));
    assert!(matches!(wrong_user, PortalError::InvalidCredentials));
    assert_eq!(wrong_pw.to_string(), wrong_user.to_string());
}

#[test]
fn tokens_are_distinct() {
    let f = fixture();
    f.portal.bootstrap_admin("root", "pw").unwrap();
    let tokens: std::collections::HashSet<String> =
        (0..100).map(|_| f.portal.authenticate("root", "pw").unwrap().token).collect();
    assert_eq!(tokens.len(), 100);
}

#[test]
fn expiry_revocation_and_deactivation() {
    let f = fixture_with(PortalConfig { session_lifetime: Duration::minutes(30), ..support::config() });
    let root = actor(Role::PortalAdmin);
    f.portal.create_principal("ana", "pw", Role::Reader(Limited), &root).unwrap();

    let s = f.portal.authenticate("ana", "pw").unwrap();
    f.clock.advance(Duration::minutes(29));
    assert_eq!(f.portal.resolve_token(Some(&s.token)).role, Role::Reader(Limited));
    f.clock.advance(Duration::minutes(1));
    assert!(f.portal.resolve_token(Some(&s.token)).is_anonymous());
    assert_eq!(f.portal.purge_expired_sessions().unwrap(), 1);

    let a = f.portal.authenticate("ana", "pw").unwrap();
    let b = f.portal.authenticate("ana", "pw").unwrap();
    f.portal.revoke_session(&a.token).unwrap();
    assert!(f.portal.resolve_token(Some(&a.token)).is_anonymous());
    assert!(!f.portal.resolve_token(Some(&b.token)).is_anonymous());

    f.portal.set_principal_active("ana", false, &root).unwrap();
    assert!(f.portal.resolve_token(Some(&b.token)).is_anonymous());
    assert!(matches!(f.portal.authenticate("ana", "pw"), Err(PortalError::AccountInactive)));
    assert!(matches!(f.portal.authenticate("ana", "bad"), Err(PortalError::InvalidCredentials)));

    assert!(f.portal.resolve_token(None).is_anonymous());
    assert!(f.portal.resolve_token(Some("deadbeef")).is_anonymous());
}

#[test]
fn account_management_rules() {
    let f = fixture();
    let root = actor(Role::PortalAdmin);
    let editor = actor(Role::Editor(Restricted));
    assert!(matches!(
        f.portal.create_principal("x", "pw", Role::Reader(Open), &editor),
        Err(PortalError::AuthorizationDenied(DenyReason::NotAnAdmin))
    ));
    assert!(matches!(
        f.portal.create_principal("ops", "pw", Role::SystemAdmin, &root),
        Err(PortalError::AuthorizationDenied(_))
    ));
    f.portal.create_principal("Bob", "pw", Role::Editor(Open), &root).unwrap();
    assert!(matches!(
        f.portal.create_principal("bob", "pw2", Role::Editor(Open), &root),
        Err(PortalError::DuplicateUsername(_))
    ));
    assert!(matches!(
        f.portal.create_principal("a b", "pw", Role::Editor(Open), &root),
        Err(PortalError::InvalidInput(_))
    ));
    let names: Vec<String> = f.portal.list_principals(&root).unwrap().into_iter().map(|p| p.username).collect();
    assert_eq!(names, ["Bob"]);
}

#[test]
fn passwords_never_stored_in_clear() {
    let f = fixture();
    f.portal.bootstrap_admin("root", "correct horse battery").unwrap();
    let s = f.portal.authenticate("root", "correct horse battery").unwrap();
    f.portal.store().snapshot().unwrap();
    for entry in walk(f.dir.path()) {
        let bytes = std::fs::read(&entry).unwrap();
        let text = String::from_utf8_lossy(&bytes);
        assert!(!text.contains("correct horse battery"), "{}", entry.display());
        assert!(!text.contains(&s.token), "{}", entry.display());
    }
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

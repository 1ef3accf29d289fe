//! Randomized update sequences checking history length, contiguity,
//! immutability of earlier revisions and single-winner conflicts.

use std::sync::Barrier;

use belnet_core::{AccessTier, Actor, Portal, PortalError, ResourceDraft, ResourcePatch, Revision};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;

const WORDS: &[&str] = &[
    "gamma",
    "beta",
    "dose",
    "$\\mu$",
    "$x^2$",
    "$\\frac{1}{2}$",
    "shield",
    "lead",
    "Cs-137",
    "$\\sqrt{N}$",
    "<b>",
    "&amp;",
    "\u{3b1}",
    "\n",
    "\n\n",
];

fn text(rng: &mut StdRng) -> String {
    let n = rng.random_range(0..8);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn history_bytes(h: &[Revision]) -> Vec<String> {
    h.iter().map(|r| serde_json::to_string(r).unwrap()).collect()
}

/// Runs one sequence against `portal`. Returns a description of the first
/// violated expectation.
pub fn run_sequence(portal: &Portal, rng: &mut StdRng) -> Result<(), String> {
    let editor = Actor::system();
    let reader = Actor::anonymous();
    let mut states = vec![(text(rng), text(rng))];
    let draft = ResourceDraft {
        title: states[0].0.clone(),
        body: states[0].1.clone(),
        tier: AccessTier::Open,
        ..Default::default()
    };
    let r = portal.create_resource(draft, &editor).map_err(|e| format!("create: {e}"))?;
    let id = r.id;
    let mut previous = history_bytes(&portal.revision_history(id, &reader).map_err(|e| e.to_string())?);

    let updates = rng.random_range(0..7);
    for i in 0..updates {
        let mut patch = ResourcePatch::default();
        let (mut title, mut body) = states.last().unwrap().clone();
        if rng.random_bool(0.6) {
            title = text(rng);
            patch.title = Some(title.clone());
        }
        if rng.random_bool(0.6) {
            body = text(rng);
            patch.body = Some(body.clone());
        }
        if i > 0 && rng.random_bool(0.3) {
            let stale = rng.random_range(0..i as u64);
            match portal.update_resource(id, patch.clone(), stale, &editor) {
                Err(PortalError::RevisionConflict { current, .. }) if current == i as u64 => {}
                other => return Err(format!("stale update at {stale} gave {other:?}")),
            }
        }
        let r = portal.update_resource(id, patch, i as u64, &editor).map_err(|e| format!("update {i}: {e}"))?;
        if r.current_revision != i as u64 + 1 {
            return Err(format!("revision {} after update {i}", r.current_revision));
        }
        states.push((title, body));

        let now = history_bytes(&portal.revision_history(id, &reader).map_err(|e| e.to_string())?);
        if now.len() != previous.len() + 1 || now[..previous.len()] != previous[..] {
            return Err(format!("earlier revisions changed at update {i}"));
        }
        previous = now;
    }

    // Two writers citing the same revision: exactly one may win.
    let current = updates as u64;
    let barrier = Barrier::new(2);
    let bodies = [text(rng), text(rng)];
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = bodies
            .iter()
            .map(|b| {
                let barrier = &barrier;
                let editor = &editor;
                s.spawn(move || {
                    let patch = ResourcePatch { body: Some(b.clone()), ..Default::default() };
                    barrier.wait();
                    portal.update_resource(id, patch, current, editor)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let winners: Vec<usize> = (0..2).filter(|&k| results[k].is_ok()).collect();
    if winners.len() != 1 {
        return Err(format!("{} winners in a conflicting pair", winners.len()));
    }
    let loser = 1 - winners[0];
    if !matches!(results[loser], Err(PortalError::RevisionConflict { .. })) {
        return Err(format!("loser got {:?}", results[loser]));
    }
    let (title, _) = states.last().unwrap().clone();
    states.push((title, bodies[winners[0]].clone()));

    let history = portal.revision_history(id, &reader).map_err(|e| e.to_string())?;
    if history.len() != states.len() {
        return Err(format!("history has {} entries, expected {}", history.len(), states.len()));
    }
    if history_bytes(&history)[..previous.len()] != previous[..] {
        return Err("earlier revisions changed after the conflicting pair".into());
    }
    for (i, (rev, (title, body))) in history.iter().zip(&states).enumerate() {
        if rev.index != i as u64 || rev.resource_id != id {
            return Err(format!("entry {i} has index {}", rev.index));
        }
        if &rev.title != title || &rev.body != body {
            return Err(format!("entry {i} differs from the submitted state"));
        }
    }
    Ok(())
}

use std::collections::{BTreeMap, HashSet};

use belnet_store::{Keyspace, TxnBatch};
use serde::{Deserialize, Serialize};

use super::{doc, guard_failure, Portal};
use crate::access::{AccessTier, Action};
use crate::error::{PortalError, Result};
use crate::ids::TaxonomyNodeId;
use crate::model::{glossary_key, Actor, TaxonomyNode};

pub(crate) fn node_key(id: TaxonomyNodeId) -> String {
    format!("node/{id}")
}

/// Index entry enforcing unique labels among siblings.
pub(crate) fn child_key(parent: Option<TaxonomyNodeId>, label: &str) -> String {
    let parent = parent.map_or_else(|| "root".to_owned(), |p| p.to_string());
    format!("child/{parent}/{}", glossary_key(label))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ChildIndex {
    pub id: TaxonomyNodeId,
}

impl Portal {
    pub fn taxonomy_node(&self, id: TaxonomyNodeId) -> Result<Option<TaxonomyNode>> {
        self.load(Keyspace::Taxonomy, &node_key(id))
    }

    pub fn add_taxonomy_node(
        &self,
        parent_id: Option<TaxonomyNodeId>,
        label: &str,
        actor: &Actor,
    ) -> Result<TaxonomyNode> {
        self.check(actor, Action::Admin, AccessTier::Open)?;
        let label = label.trim();
        if label.is_empty() {
            return Err(PortalError::InvalidInput("taxonomy label is empty".into()));
        }
        if let Some(p) = parent_id {
            self.taxonomy_node(p)?.ok_or_else(|| PortalError::NotFound(format!("taxonomy node {p}")))?;
        }
        let node = TaxonomyNode {
            id: TaxonomyNodeId::random(),
            parent_id,
            label: label.to_owned(),
            sort_key: glossary_key(label),
        };
        let ck = child_key(parent_id, label);
        let mut batch = TxnBatch::new()
            .expect_absent(Keyspace::Taxonomy, &ck)
            .put(Keyspace::Taxonomy, &ck, doc(&ChildIndex { id: node.id })?)
            .put(Keyspace::Taxonomy, node_key(node.id), doc(&node)?);
        if let Some(p) = parent_id {
            // Keeps the parent from being moved away mid-insert.
            let (_, h) = self
                .load_hashed::<TaxonomyNode>(Keyspace::Taxonomy, &node_key(p))?
                .ok_or_else(|| PortalError::NotFound(format!("taxonomy node {p}")))?;
            batch = batch.expect_hash(Keyspace::Taxonomy, node_key(p), h);
        }
        match self.execute(batch) {
            Ok(()) => Ok(node),
            Err(e) => match guard_failure(&e) {
                Some((_, k)) if k == ck => Err(PortalError::DuplicateSiblingLabel(label.into())),
                Some(_) => self.add_taxonomy_node(parent_id, label, actor),
                None => Err(e.into()),
            },
        }
    }

    /// Re-parents a node. Rejects moves that would put a node under itself.
    pub fn move_taxonomy_node(
        &self,
        id: TaxonomyNodeId,
        new_parent: Option<TaxonomyNodeId>,
        actor: &Actor,
    ) -> Result<TaxonomyNode> {
        self.check(actor, Action::Admin, AccessTier::Open)?;
        loop {
            let (node, node_hash) = self
                .load_hashed::<TaxonomyNode>(Keyspace::Taxonomy, &node_key(id))?
                .ok_or_else(|| PortalError::NotFound(format!("taxonomy node {id}")))?;
            if node.parent_id == new_parent {
                return Ok(node);
            }
            let mut batch = TxnBatch::new().expect_hash(Keyspace::Taxonomy, node_key(id), node_hash);
            // Guard every ancestor of the destination so a concurrent move
            // cannot close a loop behind our back.
            let mut cursor = new_parent;
            while let Some(c) = cursor {
                if c == id {
                    return Err(PortalError::CycleRejected);
                }
                let (n, h) = self
                    .load_hashed::<TaxonomyNode>(Keyspace::Taxonomy, &node_key(c))?
                    .ok_or_else(|| PortalError::NotFound(format!("taxonomy node {c}")))?;
                batch = batch.expect_hash(Keyspace::Taxonomy, node_key(c), h);
                cursor = n.parent_id;
            }
            let old_ck = child_key(node.parent_id, &node.label);
            let new_ck = child_key(new_parent, &node.label);
            let moved = TaxonomyNode { parent_id: new_parent, ..node };
            batch = batch
                .expect_absent(Keyspace::Taxonomy, &new_ck)
                .delete(Keyspace::Taxonomy, old_ck)
                .put(Keyspace::Taxonomy, &new_ck, doc(&ChildIndex { id })?)
                .put(Keyspace::Taxonomy, node_key(id), doc(&moved)?);
            match self.execute(batch) {
                Ok(()) => return Ok(moved),
                Err(e) => match guard_failure(&e) {
                    Some((_, k)) if k == new_ck => return Err(PortalError::DuplicateSiblingLabel(moved.label)),
                    Some(_) => continue,
                    None => return Err(e.into()),
                },
            }
        }
    }

    /// Every node, depth first, siblings ordered by sort key then id.
    pub fn list_taxonomy(&self) -> Result<Vec<TaxonomyNode>> {
        let nodes: Vec<TaxonomyNode> = self.scan(Keyspace::Taxonomy, "node/")?;
        let mut children: BTreeMap<Option<TaxonomyNodeId>, Vec<TaxonomyNode>> = BTreeMap::new();
        for n in nodes {
            children.entry(n.parent_id).or_default().push(n);
        }
        for list in children.values_mut() {
            list.sort_by(|a, b| a.sort_key.cmp(&b.sort_key).then(a.id.cmp(&b.id)));
        }
        let mut out = Vec::new();
        let mut stack: Vec<TaxonomyNode> = children.remove(&None).unwrap_or_default().into_iter().rev().collect();
        while let Some(n) = stack.pop() {
            if let Some(kids) = children.remove(&Some(n.id)) {
                stack.extend(kids.into_iter().rev());
            }
            out.push(n);
        }
        Ok(out)
    }

    /// Nodes from the root down to `id`.
    pub fn taxonomy_path(&self, id: TaxonomyNodeId) -> Result<Vec<TaxonomyNode>> {
        let mut path = Vec::new();
        let mut seen = HashSet::new();
        let mut cursor = Some(id);
        while let Some(c) = cursor {
            if !seen.insert(c) {
                return Err(PortalError::CycleRejected);
            }
            let n = self.taxonomy_node(c)?.ok_or_else(|| PortalError::NotFound(format!("taxonomy node {c}")))?;
            cursor = n.parent_id;
            path.push(n);
        }
        path.reverse();
        Ok(path)
    }

    /// `id` and all its descendants.
    pub(crate) fn subtree(&self, id: TaxonomyNodeId) -> Result<HashSet<TaxonomyNodeId>> {
        if self.taxonomy_node(id)?.is_none() {
            return Err(PortalError::UnknownTaxonomyNode(id.to_string()));
        }
        let nodes: Vec<TaxonomyNode> = self.scan(Keyspace::Taxonomy, "node/")?;
        let mut out = HashSet::from([id]);
        loop {
            let before = out.len();
            for n in &nodes {
                if n.parent_id.is_some_and(|p| out.contains(&p)) {
                    out.insert(n.id);
                }
            }
            if out.len() == before {
                return Ok(out);
            }
        }
    }
}

use belnet_store::{Keyspace, TxnBatch};

use super::{doc, Portal};
use crate::access::{AccessTier, Action};
use crate::error::{PortalError, Result};
use crate::model::{glossary_key, Actor, GlossaryEntry};

impl Portal {
    /// Inserts or replaces the entry stored under the folded form of its term.
    pub fn upsert_glossary_term(&self, entry: GlossaryEntry, actor: &Actor) -> Result<GlossaryEntry> {
        self.check(actor, Action::Write, AccessTier::Open)?;
        let key = glossary_key(&entry.term);
        if key.is_empty() {
            return Err(PortalError::EmptyTerm);
        }
        belnet_markup::parse(&entry.definition)?;
        let entry = GlossaryEntry { term: entry.term.trim().to_owned(), ..entry };
        self.execute(TxnBatch::new().put(Keyspace::Glossary, key, doc(&entry)?))?;
        Ok(entry)
    }

    pub fn glossary_term(&self, term: &str) -> Result<Option<GlossaryEntry>> {
        self.load(Keyspace::Glossary, &glossary_key(term))
    }

    /// Entries whose folded term starts with the folded prefix, in key order.
    pub fn search_terms(&self, prefix: &str) -> Result<Vec<GlossaryEntry>> {
        let mut p = glossary_key(prefix);
        if prefix.ends_with(char::is_whitespace) && !p.is_empty() {
            p.push(' ');
        }
        self.scan(Keyspace::Glossary, &p)
    }
}

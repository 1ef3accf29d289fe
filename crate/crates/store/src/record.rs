use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::StoreError;

/// Logical table a record lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Keyspace {
    Resources,
    Revisions,
    Glossary,
    Taxonomy,
    Principals,
    Sessions,
    Attachments,
}

impl Keyspace {
    pub const ALL: [Keyspace; 7] = [
        Keyspace::Resources,
        Keyspace::Revisions,
        Keyspace::Glossary,
        Keyspace::Taxonomy,
        Keyspace::Principals,
        Keyspace::Sessions,
        Keyspace::Attachments,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Keyspace::Resources => "resources",
            Keyspace::Revisions => "revisions",
            Keyspace::Glossary => "glossary",
            Keyspace::Taxonomy => "taxonomy",
            Keyspace::Principals => "principals",
            Keyspace::Sessions => "sessions",
            Keyspace::Attachments => "attachments",
        }
    }
}

impl fmt::Display for Keyspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Keyspace {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Keyspace::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| StoreError::InvalidRecord(format!("unknown keyspace {s:?}")))
    }
}

/// A stored value. Every document declares the schema version of `data`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: u32,
    pub data: serde_json::Value,
}

impl Document {
    pub fn new(schema_version: u32, data: serde_json::Value) -> Self {
        Self { schema_version, data }
    }

    /// Serializes `value` as the document payload.
    pub fn from_value<T: Serialize>(schema_version: u32, value: &T) -> Result<Self, StoreError> {
        let data = serde_json::to_value(value).map_err(|e| StoreError::InvalidRecord(e.to_string()))?;
        Ok(Self::new(schema_version, data))
    }

    pub fn to_value<T: for<'de> Deserialize<'de>>(&self) -> Result<T, StoreError> {
        T::deserialize(&self.data).map_err(|e| StoreError::InvalidRecord(e.to_string()))
    }

    pub fn hash(&self) -> ValueHash {
        // serde_json maps are ordered by key, so the encoding is canonical.
        let bytes = serde_json::to_vec(self).expect("documents always serialize");
        ValueHash(Sha256::digest(&bytes).into())
    }

    pub(crate) fn validate(&self) -> Result<(), StoreError> {
        if self.schema_version == 0 {
            return Err(StoreError::InvalidRecord("schema_version must be at least 1".into()));
        }
        Ok(())
    }
}

/// SHA-256 of a document's canonical encoding; used by compare-and-set guards.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ValueHash(pub [u8; 32]);

impl fmt::Debug for ValueHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ValueHash({})", hex::encode(self.0))
    }
}

impl fmt::Display for ValueHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    Put { keyspace: Keyspace, key: String, value: Document },
    Delete { keyspace: Keyspace, key: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// The key must not exist.
    Absent { keyspace: Keyspace, key: String },
    /// The key must exist and hash to the given value.
    Matches { keyspace: Keyspace, key: String, hash: ValueHash },
}

/// Mutations applied all-or-nothing once every guard holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TxnBatch {
    pub guards: Vec<Guard>,
    pub mutations: Vec<Mutation>,
}

impl TxnBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(mut self, keyspace: Keyspace, key: impl Into<String>, value: Document) -> Self {
        self.mutations.push(Mutation::Put { keyspace, key: key.into(), value });
        self
    }

    pub fn delete(mut self, keyspace: Keyspace, key: impl Into<String>) -> Self {
        self.mutations.push(Mutation::Delete { keyspace, key: key.into() });
        self
    }

    pub fn expect_absent(mut self, keyspace: Keyspace, key: impl Into<String>) -> Self {
        self.guards.push(Guard::Absent { keyspace, key: key.into() });
        self
    }

    pub fn expect_hash(mut self, keyspace: Keyspace, key: impl Into<String>, hash: ValueHash) -> Self {
        self.guards.push(Guard::Matches { keyspace, key: key.into(), hash });
        self
    }

    pub fn is_empty(&self) -> bool {
        self.guards.is_empty() && self.mutations.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn hash_is_stable_and_order_insensitive() {
        let a = Document::new(1, json!({"b": 2, "a": 1}));
        let b = Document::new(1, json!({"a": 1, "b": 2}));
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), Document::new(2, json!({"a": 1, "b": 2})).hash());
    }

    #[test]
    fn schema_version_zero_rejected() {
        assert!(Document::new(0, json!(null)).validate().is_err());
        assert!(Document::new(1, json!(null)).validate().is_ok());
    }

    #[test]
    fn keyspace_names_round_trip() {
        for ks in Keyspace::ALL {
            assert_eq!(ks.as_str().parse::<Keyspace>().unwrap(), ks);
        }
        assert!("nope".parse::<Keyspace>().is_err());
    }
}

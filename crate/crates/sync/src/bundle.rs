use std::cmp::Ordering;
use std::fmt;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BundleId(pub Uuid);

impl fmt::Display for BundleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Destination {
    Node(NodeId),
    Broadcast,
}

impl Destination {
    pub fn node(id: impl Into<NodeId>) -> Self {
        Self::Node(id.into())
    }

    pub fn is(&self, node: &NodeId) -> bool {
        matches!(self, Destination::Node(n) if n == node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadKind {
    ResponseSet,
    Observation,
    Ack,
}

/// Transfer priority. `Elevated` sorts above `Routine`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Priority {
    #[default]
    Routine,
    Elevated,
}

/// The unit of store-and-forward replication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bundle {
    pub id: BundleId,
    pub origin: NodeId,
    pub destination: Destination,
    pub kind: PayloadKind,
    pub payload: Vec<u8>,
    /// Millisecond precision, matching the wire encoding.
    pub created_at: DateTime<Utc>,
    pub lamport: u64,
    pub ttl_seconds: u64,
    pub priority: Priority,
    pub hop_count: u32,
}

impl Bundle {
    /// `None` when the lifetime overflows the timestamp range, i.e. the
    /// bundle never expires.
    pub fn expires_at(&self) -> Option<DateTime<Utc>> {
        let ttl = i64::try_from(self.ttl_seconds).ok()?;
        self.created_at.checked_add_signed(TimeDelta::try_seconds(ttl)?)
    }

    /// Expired once `created_at + ttl < now`.
    pub fn is_expired(&self, now: DateTime<Utc>) -> bool {
        self.expires_at().is_some_and(|end| end < now)
    }

    /// Transfer order within one contact: elevated first, then oldest, then id.
    pub fn transfer_order(&self, other: &Bundle) -> Ordering {
        other
            .priority
            .cmp(&self.priority)
            .then(self.created_at.cmp(&other.created_at))
            .then(self.id.cmp(&other.id))
    }

    /// The bundle id an ack refers to, when this is a well-formed ack.
    pub fn acked_id(&self) -> Option<BundleId> {
        if self.kind != PayloadKind::Ack {
            return None;
        }
        let bytes: [u8; 16] = self.payload.as_slice().try_into().ok()?;
        Some(BundleId(Uuid::from_bytes(bytes)))
    }
}

/// Payload sealing for relays. Relays never look inside a payload.
///
/// NOTE: this is an identity encoding. No encryption is performed; key
/// management is not part of this crate.
pub mod payload {
    pub fn seal(plain: &[u8]) -> Vec<u8> {
        plain.to_vec()
    }

    pub fn open(sealed: &[u8]) -> Vec<u8> {
        sealed.to_vec()
    }
}

/// Version stamp of a replicated record.
///
/// Totally ordered by lamport value, ties broken by the origin id bytes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RecordVersion {
    pub record_id: String,
    pub lamport: u64,
    pub origin: NodeId,
}

impl RecordVersion {
    fn order_key(&self) -> (u64, &[u8]) {
        (self.lamport, self.origin.as_str().as_bytes())
    }
}

impl PartialOrd for RecordVersion {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RecordVersion {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key()
            .cmp(&other.order_key())
            .then_with(|| self.record_id.cmp(&other.record_id))
    }
}

/// Last-writer-wins merge of two versions of the same record. The incoming
/// side replaces the existing one only when its version is strictly greater,
/// so equal versions keep what is already stored.
pub fn resolve_conflict<'a, P>(
    existing: (&'a RecordVersion, &'a P),
    incoming: (&'a RecordVersion, &'a P),
) -> (&'a RecordVersion, &'a P) {
    debug_assert_eq!(existing.0.record_id, incoming.0.record_id);
    if incoming.0 > existing.0 {
        incoming
    } else {
        existing
    }
}

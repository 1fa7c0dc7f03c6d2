use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::bundle::{Bundle, BundleId, Destination, NodeId, PayloadKind, Priority};

pub const DEFAULT_TTL_SECONDS: u64 = 14 * 24 * 60 * 60;
pub const DEFAULT_PAYLOAD_CAP: usize = 1024 * 1024;

const DEFAULT_NAMESPACE: Uuid = Uuid::from_u128(0x6f1d_4a8e_9b2c_4e57_a3d0_5c8f_21b6_e904);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyncError {
    #[error("payload must not be empty")]
    EmptyPayload,
    #[error("ttl must be positive")]
    InvalidTtl,
    #[error("payload of {size} bytes exceeds cap of {cap}")]
    PayloadTooLarge { size: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreConfig {
    pub payload_cap: usize,
    /// Lifetime given to acks this node emits.
    pub ack_ttl_seconds: u64,
    /// Namespace for deterministic bundle ids.
    pub id_namespace: Uuid,
}

impl Default for StoreConfig {
    fn default() -> Self {
        Self {
            payload_cap: DEFAULT_PAYLOAD_CAP,
            ack_ttl_seconds: DEFAULT_TTL_SECONDS,
            id_namespace: DEFAULT_NAMESPACE,
        }
    }
}

impl StoreConfig {
    /// Derives the id namespace from a seed so simulated runs are reproducible.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.id_namespace = Uuid::new_v5(&DEFAULT_NAMESPACE, &seed.to_be_bytes());
        self
    }
}

/// What a peer advertises at the start of a contact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryVector {
    pub node_id: NodeId,
    /// Unexpired bundles currently held.
    pub bundle_ids: BTreeSet<BundleId>,
    /// Bundles known to be delivered; peers must not resend these.
    pub delivered: BTreeSet<BundleId>,
}

impl SummaryVector {
    pub fn wants(&self, id: &BundleId) -> bool {
        !self.bundle_ids.contains(id) && !self.delivered.contains(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "receipt", rename_all = "snake_case")]
pub enum Receipt {
    /// Held for onward relaying.
    Stored,
    /// This node is the destination; an ack bundle was emitted.
    Delivered { ack: BundleId },
    Duplicate,
    Expired,
}

/// One node's bundle buffer and logical clock.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStore {
    node_id: NodeId,
    held: BTreeMap<BundleId, Bundle>,
    /// Bundles addressed to this node that arrived here.
    delivered: BTreeSet<BundleId>,
    /// Bundles known (via acks) to have reached their destination.
    acked: BTreeSet<BundleId>,
    lamport_clock: u64,
    config: StoreConfig,
}

impl NodeStore {
    pub fn new(node_id: impl Into<NodeId>) -> Self {
        Self::with_config(node_id, StoreConfig::default())
    }

    pub fn with_config(node_id: impl Into<NodeId>, config: StoreConfig) -> Self {
        Self {
            node_id: node_id.into(),
            held: BTreeMap::new(),
            delivered: BTreeSet::new(),
            acked: BTreeSet::new(),
            lamport_clock: 0,
            config,
        }
    }

    pub fn node_id(&self) -> &NodeId {
        &self.node_id
    }

    pub fn lamport_clock(&self) -> u64 {
        self.lamport_clock
    }

    pub fn held(&self) -> impl Iterator<Item = &Bundle> {
        self.held.values()
    }

    pub fn get(&self, id: &BundleId) -> Option<&Bundle> {
        self.held.get(id)
    }

    pub fn holds(&self, id: &BundleId) -> bool {
        self.held.contains_key(id)
    }

    pub fn is_delivered(&self, id: &BundleId) -> bool {
        self.delivered.contains(id)
    }

    pub fn is_acked(&self, id: &BundleId) -> bool {
        self.acked.contains(id)
    }

    pub fn delivered(&self) -> &BTreeSet<BundleId> {
        &self.delivered
    }

    /// Ids of held bundles that have not expired at `now`.
    pub fn unexpired_ids(&self, now: DateTime<Utc>) -> BTreeSet<BundleId> {
        self.held
            .values()
            .filter(|b| !b.is_expired(now))
            .map(|b| b.id)
            .collect()
    }

    fn tick(&mut self) -> u64 {
        self.lamport_clock += 1;
        self.lamport_clock
    }

    fn next_id(&self) -> BundleId {
        let mut name = self.node_id.as_str().as_bytes().to_vec();
        name.push(0);
        name.extend_from_slice(&self.lamport_clock.to_be_bytes());
        BundleId(Uuid::new_v5(&self.config.id_namespace, &name))
    }

    /// Packages a payload as a new bundle originating here and holds it.
    pub fn create_bundle(
        &mut self,
        destination: Destination,
        kind: PayloadKind,
        payload: Vec<u8>,
        ttl_seconds: u64,
        priority: Priority,
        now: DateTime<Utc>,
    ) -> Result<Bundle, SyncError> {
        if payload.is_empty() {
            return Err(SyncError::EmptyPayload);
        }
        if ttl_seconds == 0 {
            return Err(SyncError::InvalidTtl);
        }
        if payload.len() > self.config.payload_cap {
            return Err(SyncError::PayloadTooLarge {
                size: payload.len(),
                cap: self.config.payload_cap,
            });
        }
        Ok(self.emit(destination, kind, payload, ttl_seconds, priority, now))
    }

    fn emit(
        &mut self,
        destination: Destination,
        kind: PayloadKind,
        payload: Vec<u8>,
        ttl_seconds: u64,
        priority: Priority,
        now: DateTime<Utc>,
    ) -> Bundle {
        let lamport = self.tick();
        let created_at = DateTime::from_timestamp_millis(now.timestamp_millis()).unwrap_or(now);
        let bundle = Bundle {
            id: self.next_id(),
            origin: self.node_id.clone(),
            destination,
            kind,
            payload,
            created_at,
            lamport,
            ttl_seconds,
            priority,
            hop_count: 0,
        };
        self.held.insert(bundle.id, bundle.clone());
        bundle
    }

    pub fn summary_vector(&self, now: DateTime<Utc>) -> SummaryVector {
        SummaryVector {
            node_id: self.node_id.clone(),
            bundle_ids: self.unexpired_ids(now),
            delivered: self.delivered.union(&self.acked).copied().collect(),
        }
    }

    /// Applies an incoming bundle copy. Receiving the same id twice is a no-op.
    ///
    /// The outcome is a pure function of the current state, the bundle and
    /// `now`, so replaying a receive log reproduces the store exactly.
    pub fn receive(&mut self, bundle: Bundle, now: DateTime<Utc>) -> Receipt {
        if bundle.is_expired(now) {
            return Receipt::Expired;
        }
        let id = bundle.id;
        if self.held.contains_key(&id) || self.delivered.contains(&id) || self.acked.contains(&id)
        {
            return Receipt::Duplicate;
        }
        self.lamport_clock = self.lamport_clock.max(bundle.lamport) + 1;

        if let Some(acked) = bundle.acked_id() {
            self.acked.insert(acked);
        }
        let for_me = bundle.destination.is(&self.node_id);
        self.held.insert(id, bundle);
        if !for_me {
            return Receipt::Stored;
        }

        self.delivered.insert(id);
        self.acked.insert(id);
        let ack = self.emit(
            Destination::Broadcast,
            PayloadKind::Ack,
            id.0.as_bytes().to_vec(),
            self.config.ack_ttl_seconds,
            Priority::Routine,
            now,
        );
        Receipt::Delivered { ack: ack.id }
    }

    /// Drops held bundles that expired at `now`.
    pub fn purge_expired(&mut self, now: DateTime<Utc>) -> Vec<BundleId> {
        let expired: Vec<_> = self
            .held
            .values()
            .filter(|b| b.is_expired(now))
            .map(|b| b.id)
            .collect();
        for id in &expired {
            self.held.remove(id);
        }
        expired
    }

    /// Removes expired bundles and copies already acknowledged as delivered.
    pub fn gc(&mut self, now: DateTime<Utc>) -> Vec<BundleId> {
        let mut purged = self.purge_expired(now);
        let acked: Vec<_> = self
            .held
            .keys()
            .filter(|id| self.acked.contains(id))
            .copied()
            .collect();
        for id in &acked {
            self.held.remove(id);
        }
        purged.extend(acked);
        purged.sort();
        purged
    }
}

//! Event-sourced service state. Every change goes through [`State::apply`],
//! so replaying the event log from empty rebuilds the same state.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use rpm_core::{
    ConsentDecision, DistressSummary, Observation, ObservationStore, ResponseSet, SusResponse,
};
use rpm_sync::{Bundle, NodeStore, Receipt, RecordVersion};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::auth::{Credential, Role, UserAccount};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredScreening {
    pub response: ResponseSet,
    /// Absent for paper entries, which are image only.
    pub summary: Option<DistressSummary>,
    pub version: RecordVersion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusRecord {
    pub user_id: String,
    pub role: Role,
    pub tool_label: String,
    pub response: SusResponse,
    pub score: f64,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum BundleRecord {
    Screening(StoredScreening),
    Observation(Observation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    UserRegistered {
        account: UserAccount,
        credential: Credential,
    },
    ResponseAccepted {
        screening: StoredScreening,
    },
    ConsentChanged {
        subject_id: String,
        data_type: String,
        decision: ConsentDecision,
    },
    SusRecorded {
        record: SusRecord,
    },
    /// A bundle taken into the clinic node, with the record it carried when
    /// that record changed state.
    BundleReceived {
        bundle: Bundle,
        record: Option<BundleRecord>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub account: UserAccount,
    pub credential: Credential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub last_seq: u64,
    pub users: BTreeMap<String, UserRecord>,
    pub screenings: BTreeMap<Uuid, StoredScreening>,
    pub observations: ObservationStore,
    pub sus: Vec<SusRecord>,
    pub node: NodeStore,
}

impl State {
    pub fn new(node_id: &str) -> Self {
        Self {
            last_seq: 0,
            users: BTreeMap::new(),
            screenings: BTreeMap::new(),
            observations: ObservationStore::new(),
            sus: Vec::new(),
            node: NodeStore::new(node_id),
        }
    }

    pub fn replay<'a>(node_id: &str, events: impl IntoIterator<Item = &'a Event>) -> Self {
        let mut s = Self::new(node_id);
        for e in events {
            s.apply(e);
        }
        s
    }

    /// Applies one event. Returns the sync receipt for bundle events.
    pub fn apply(&mut self, event: &Event) -> Option<Receipt> {
        debug_assert_eq!(event.seq, self.last_seq + 1, "events applied out of order");
        self.last_seq = event.seq;
        match &event.kind {
            EventKind::UserRegistered { account, credential } => {
                if account.role == Role::Patient {
                    self.observations.register_subject(account.user_id.clone());
                }
                self.users.insert(
                    account.user_id.clone(),
                    UserRecord {
                        account: account.clone(),
                        credential: credential.clone(),
                    },
                );
                None
            }
            EventKind::ResponseAccepted { screening } => {
                self.screenings.insert(screening.response.id, screening.clone());
                None
            }
            EventKind::ConsentChanged {
                subject_id,
                data_type,
                decision,
            } => {
                // Validated before the event was written.
                let _ = self.observations.set_consent(subject_id, data_type, *decision, event.at);
                None
            }
            EventKind::SusRecorded { record } => {
                self.sus.push(record.clone());
                None
            }
            EventKind::BundleReceived { bundle, record } => {
                let receipt = self.node.receive(bundle.clone(), event.at);
                match record {
                    Some(BundleRecord::Screening(s)) => {
                        self.screenings.insert(s.response.id, s.clone());
                    }
                    Some(BundleRecord::Observation(o)) => self.observations.insert_unchecked(o.clone()),
                    None => {}
                }
                Some(receipt)
            }
        }
    }

    pub fn patient(&self, subject_id: &str) -> Option<&UserAccount> {
        self.users
            .get(subject_id)
            .map(|u| &u.account)
            .filter(|a| a.role == Role::Patient)
    }

    /// Screenings of one subject, oldest first.
    pub fn screenings_of(&self, subject_id: &str) -> Vec<&StoredScreening> {
        let mut out: Vec<_> = self
            .screenings
            .values()
            .filter(|s| s.response.subject_id == subject_id)
            .collect();
        out.sort_by_key(|s| (s.response.completed_at, s.response.id));
        out
    }

    /// The ack this node emitted for a delivered bundle, if still held.
    pub fn ack_for(&self, id: &rpm_sync::BundleId) -> Option<&Bundle> {
        self.node.held().find(|b| b.acked_id().as_ref() == Some(id))
    }
}

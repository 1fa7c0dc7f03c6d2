//! Delay-tolerant, store-and-forward replication between devices.
//!
//! Records travel as [`Bundle`]s. When two nodes meet they swap
//! [`SummaryVector`]s and copy across whatever the other side is missing,
//! within the contact's budget. A bundle reaching its destination triggers a
//! broadcast ack so relays can drop their copies.

pub mod bundle;
pub mod exchange;
pub mod store;
pub mod wire;

pub use bundle::{
    payload, resolve_conflict, Bundle, BundleId, Destination, NodeId, PayloadKind, Priority,
    RecordVersion,
};
pub use exchange::{apply_transcript, exchange, ContactBudget, ExchangeLog, Routing, Transfer};
pub use store::{
    NodeStore, Receipt, StoreConfig, SummaryVector, SyncError, DEFAULT_PAYLOAD_CAP,
    DEFAULT_TTL_SECONDS,
};
pub use wire::WireError;

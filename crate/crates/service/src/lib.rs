//! Clinic-side service: accounts and bearer tokens, screening and
//! observation intake (directly or as sync bundles), cadence queries, and a
//! gap-free audit trail. State is event-sourced over a JSON-lines log.

pub mod api;
pub mod audit;
pub mod auth;
pub mod clock;
pub mod config;
pub mod device;
pub mod http;
pub mod journal;
pub mod state;

pub use api::{ApiError, AuthReason, BundleResult, BundleStatus, ScreeningView, Service};
pub use audit::{AuditAction, AuditEntry, Outcome};
pub use auth::{Role, UserAccount};
pub use clock::{Clock, ManualClock, SystemClock};
pub use config::ServiceConfig;
pub use state::{Event, EventKind, State};

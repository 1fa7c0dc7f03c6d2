//! Device-side packaging of records into bundles bound for the clinic.

use chrono::{DateTime, Utc};
use rpm_core::{compute_distress_summary, Instrument, Observation, ResponseSet};
use rpm_sync::{payload, Bundle, Destination, NodeStore, PayloadKind, Priority, SyncError};

/// Bundles a completed response. Responses whose distress score reaches the
/// threshold travel with elevated priority.
pub fn package_response(
    store: &mut NodeStore,
    clinic: &str,
    instrument: &Instrument,
    response: &ResponseSet,
    threshold: i64,
    ttl_seconds: u64,
    now: DateTime<Utc>,
) -> Result<Bundle, SyncError> {
    let flagged = compute_distress_summary(instrument, response, threshold).is_ok_and(|s| s.flagged);
    let body = serde_json::to_vec(response).expect("response serializes");
    store.create_bundle(
        Destination::node(clinic),
        PayloadKind::ResponseSet,
        payload::seal(&body),
        ttl_seconds,
        if flagged { Priority::Elevated } else { Priority::Routine },
        now,
    )
}

pub fn package_observation(
    store: &mut NodeStore,
    clinic: &str,
    observation: &Observation,
    ttl_seconds: u64,
    now: DateTime<Utc>,
) -> Result<Bundle, SyncError> {
    let body = serde_json::to_vec(observation).expect("observation serializes");
    store.create_bundle(
        Destination::node(clinic),
        PayloadKind::Observation,
        payload::seal(&body),
        ttl_seconds,
        Priority::Routine,
        now,
    )
}

//! Discrete-event replay of a contact trace against a message workload.
//!
//! Contacts are the only events. Message creations due at or before a
//! contact's time are applied first; simultaneous contacts run in
//! `(time, node_a, node_b)` order. Each contact runs one [`exchange`]
//! between the two node stores with the contact's budget.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use rpm_sync::{
    exchange, BundleId, ContactBudget, Destination, NodeStore, Receipt, Routing, StoreConfig,
    DEFAULT_TTL_SECONDS,
};
use serde::{Deserialize, Serialize};

use crate::trace::{normalize, ContactEvent, DEFAULT_BANDWIDTH};
use crate::workload::Workload;
use crate::SimError;

/// Bundle lifetime meaning "never expires".
pub const INFINITE_TTL: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub routing: Routing,
    pub seed: u64,
    pub ttl_seconds: u64,
    /// Used for contacts whose bandwidth is left blank.
    pub default_bandwidth: f64,
    /// Events after this many seconds are ignored; metrics are taken here.
    pub horizon: f64,
}

impl SimConfig {
    pub fn new(routing: Routing, seed: u64, horizon: f64) -> Self {
        Self {
            routing,
            seed,
            ttl_seconds: DEFAULT_TTL_SECONDS,
            default_bandwidth: DEFAULT_BANDWIDTH,
            horizon,
        }
    }

    pub fn with_ttl(mut self, ttl_seconds: u64) -> Self {
        self.ttl_seconds = ttl_seconds;
        self
    }

    pub fn with_bandwidth(mut self, bandwidth: f64) -> Self {
        self.default_bandwidth = bandwidth;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SimError::InvalidParameter("horizon must be positive and finite".into()));
        }
        if self.ttl_seconds == 0 {
            return Err(SimError::InvalidParameter("ttl must be positive".into()));
        }
        if self.default_bandwidth.is_nan() || self.default_bandwidth < 0.0 {
            return Err(SimError::InvalidParameter("bandwidth must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub created: usize,
    pub delivered: usize,
    /// `delivered / created`, or 0 when nothing was created.
    pub delivery_ratio: f64,
    /// Seconds from creation to delivery, in message order.
    pub latencies: Vec<f64>,
    /// Bundle transmissions (acks included) per delivered message.
    pub overhead: f64,
    pub transmissions: u64,
}

impl Metrics {
    pub fn mean_latency(&self) -> Option<f64> {
        (!self.latencies.is_empty())
            .then(|| self.latencies.iter().sum::<f64>() / self.latencies.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageOutcome {
    pub index: usize,
    pub origin: String,
    pub destination: String,
    pub created_at: f64,
    pub delivered_at: Option<f64>,
    pub latency: Option<f64>,
    pub hops: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SimEvent {
    Created {
        time: f64,
        message: usize,
        bundle: BundleId,
    },
    Contact {
        time: f64,
        node_a: String,
        node_b: String,
        transfers: usize,
        purged: usize,
        budget_exhausted: bool,
    },
    Transfer {
        time: f64,
        from: String,
        to: String,
        bundle: BundleId,
        hops: u32,
    },
    Delivered {
        time: f64,
        message: usize,
        latency: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: SimConfig,
    pub metrics: Metrics,
    pub messages: Vec<MessageOutcome>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: Report,
    pub events: Vec<SimEvent>,
}

fn instant(secs: f64) -> DateTime<Utc> {
    DateTime::from_timestamp_millis((secs * 1000.0).round() as i64).unwrap_or(DateTime::<Utc>::MAX_UTC)
}

/// Runs one simulation. Identical inputs produce identical outputs.
///
/// Nodes named only in the workload are taken as declared; they simply never
/// meet anyone.
pub fn run(trace: &[ContactEvent], workload: &Workload, config: &SimConfig) -> Result<RunOutput, SimError> {
    config.validate()?;
    let contacts = normalize(trace)?;
    workload.validate()?;

    let store_config = StoreConfig {
        ack_ttl_seconds: config.ttl_seconds,
        ..StoreConfig::default()
    }
    .with_seed(config.seed);

    let mut names = BTreeSet::new();
    for c in &contacts {
        names.insert(c.node_a.clone());
        names.insert(c.node_b.clone());
    }
    for m in &workload.messages {
        names.insert(m.origin.clone());
        names.insert(m.destination.clone());
    }
    let mut stores: BTreeMap<String, NodeStore> = names
        .into_iter()
        .map(|n| (n.clone(), NodeStore::with_config(n, store_config)))
        .collect();

    let mut order: Vec<usize> = (0..workload.messages.len()).collect();
    order.sort_by(|&a, &b| workload.messages[a].time.total_cmp(&workload.messages[b].time).then(a.cmp(&b)));

    let mut outcomes: Vec<MessageOutcome> = workload
        .messages
        .iter()
        .enumerate()
        .map(|(i, m)| MessageOutcome {
            index: i,
            origin: m.origin.clone(),
            destination: m.destination.clone(),
            created_at: m.time,
            delivered_at: None,
            latency: None,
            hops: None,
        })
        .collect();
    let mut by_bundle: BTreeMap<BundleId, usize> = BTreeMap::new();
    let mut events = Vec::new();
    let mut transmissions = 0u64;
    let mut created = 0usize;
    let mut next_msg = 0usize;

    let mut create_until = |limit: f64,
                            stores: &mut BTreeMap<String, NodeStore>,
                            events: &mut Vec<SimEvent>,
                            by_bundle: &mut BTreeMap<BundleId, usize>|
     -> Result<(), SimError> {
        while next_msg < order.len() && workload.messages[order[next_msg]].time <= limit {
            let idx = order[next_msg];
            let m = &workload.messages[idx];
            let store = stores.get_mut(&m.origin).expect("node registered");
            let bundle = store.create_bundle(
                Destination::node(m.destination.as_str()),
                m.size_kind,
                format!("message-{idx}").into_bytes(),
                config.ttl_seconds,
                m.priority,
                instant(m.time),
            )?;
            by_bundle.insert(bundle.id, idx);
            events.push(SimEvent::Created {
                time: m.time,
                message: idx,
                bundle: bundle.id,
            });
            created += 1;
            next_msg += 1;
        }
        Ok(())
    };

    for contact in contacts.iter().take_while(|c| c.time <= config.horizon) {
        create_until(contact.time, &mut stores, &mut events, &mut by_bundle)?;

        let bandwidth = contact.bandwidth.unwrap_or(config.default_bandwidth);
        let budget = ContactBudget::from_contact(contact.duration, bandwidth);
        let mut a = stores.remove(&contact.node_a).expect("node registered");
        let b = stores.get_mut(&contact.node_b).expect("node registered");
        let log = exchange(&mut a, b, instant(contact.time), budget, config.routing);
        stores.insert(contact.node_a.clone(), a);

        transmissions += log.transfers.len() as u64;
        events.push(SimEvent::Contact {
            time: contact.time,
            node_a: contact.node_a.clone(),
            node_b: contact.node_b.clone(),
            transfers: log.transfers.len(),
            purged: log.purged.len(),
            budget_exhausted: log.budget_exhausted,
        });
        for t in &log.transfers {
            events.push(SimEvent::Transfer {
                time: contact.time,
                from: t.from.to_string(),
                to: t.to.to_string(),
                bundle: t.bundle.id,
                hops: t.bundle.hop_count,
            });
            if let (Receipt::Delivered { .. }, Some(&idx)) = (t.receipt, by_bundle.get(&t.bundle.id)) {
                let out = &mut outcomes[idx];
                if out.delivered_at.is_none() {
                    let latency = contact.time - out.created_at;
                    out.delivered_at = Some(contact.time);
                    out.latency = Some(latency);
                    out.hops = Some(t.bundle.hop_count);
                    events.push(SimEvent::Delivered {
                        time: contact.time,
                        message: idx,
                        latency,
                    });
                }
            }
        }
    }
    create_until(config.horizon, &mut stores, &mut events, &mut by_bundle)?;

    let latencies: Vec<f64> = outcomes.iter().filter_map(|o| o.latency).collect();
    let delivered = latencies.len();
    let metrics = Metrics {
        created,
        delivered,
        delivery_ratio: if created == 0 {
            0.0
        } else {
            delivered as f64 / created as f64
        },
        latencies,
        overhead: transmissions as f64 / delivered.max(1) as f64,
        transmissions,
    };
    // Messages created after the horizon are outside the run.
    let messages = outcomes
        .into_iter()
        .filter(|o| o.created_at <= config.horizon)
        .collect();
    Ok(RunOutput {
        report: Report {
            config: config.clone(),
            metrics,
            messages,
        },
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::Message;

    fn relay_trace() -> Vec<ContactEvent> {
        vec![
            ContactEvent::new(10.0, "P", "R", 60.0, 1.0),
            ContactEvent::new(20.0, "R", "C", 60.0, 1.0),
        ]
    }

    fn one_message() -> Workload {
        Workload::new(vec![Message::new(0.0, "P", "C")])
    }

    #[test]
    fn two_hop_relay() {
        let epi = run(&relay_trace(), &one_message(), &SimConfig::new(Routing::Epidemic, 1, 100.0)).unwrap();
        assert_eq!(epi.report.metrics.delivery_ratio, 1.0);
        assert_eq!(epi.report.metrics.latencies, vec![20.0]);
        assert_eq!(epi.report.messages[0].hops, Some(2));

        let direct = run(&relay_trace(), &one_message(), &SimConfig::new(Routing::Direct, 1, 100.0)).unwrap();
        assert_eq!(direct.report.metrics.delivery_ratio, 0.0);
        assert!(direct.report.metrics.latencies.is_empty());
    }

    #[test]
    fn empty_trace_delivers_nothing() {
        let out = run(&[], &one_message(), &SimConfig::new(Routing::Epidemic, 1, 100.0)).unwrap();
        assert_eq!(out.report.metrics.created, 1);
        assert_eq!(out.report.metrics.delivery_ratio, 0.0);
        assert_eq!(out.report.metrics.overhead, 0.0);
    }

    #[test]
    fn single_hop_same_for_both() {
        let trace = vec![ContactEvent::new(5.0, "C", "P", 60.0, 1.0)];
        for routing in [Routing::Epidemic, Routing::Direct] {
            let out = run(&trace, &one_message(), &SimConfig::new(routing, 1, 100.0)).unwrap();
            assert_eq!(out.report.messages[0].delivered_at, Some(5.0), "{routing:?}");
            assert_eq!(out.report.metrics.latencies, vec![5.0]);
            assert!(out.report.metrics.overhead >= 1.0);
        }
    }

    #[test]
    fn creation_at_contact_time_is_carried() {
        let trace = vec![ContactEvent::new(5.0, "P", "C", 60.0, 1.0)];
        let w = Workload::new(vec![Message::new(5.0, "P", "C")]);
        let out = run(&trace, &w, &SimConfig::new(Routing::Direct, 1, 100.0)).unwrap();
        assert_eq!(out.report.metrics.latencies, vec![0.0]);
    }

    #[test]
    fn horizon_cuts_contacts_and_messages() {
        let w = Workload::new(vec![Message::new(0.0, "P", "C"), Message::new(50.0, "P", "C")]);
        let out = run(&relay_trace(), &w, &SimConfig::new(Routing::Epidemic, 1, 15.0)).unwrap();
        assert_eq!(out.report.metrics.created, 1);
        assert_eq!(out.report.metrics.delivered, 0);
        assert_eq!(out.report.messages.len(), 1);
    }

    #[test]
    fn ttl_expiry_blocks_late_delivery() {
        let cfg = SimConfig::new(Routing::Epidemic, 1, 100.0).with_ttl(15);
        let out = run(&relay_trace(), &one_message(), &cfg).unwrap();
        assert_eq!(out.report.metrics.delivered, 0);
    }

    #[test]
    fn zero_bandwidth_contacts_move_nothing() {
        let trace = vec![ContactEvent::new(5.0, "P", "C", 60.0, 0.0)];
        let out = run(&trace, &one_message(), &SimConfig::new(Routing::Epidemic, 1, 100.0)).unwrap();
        assert_eq!(out.report.metrics.transmissions, 0);
    }

    #[test]
    fn malformed_inputs() {
        let bad = vec![ContactEvent::new(5.0, "P", "P", 1.0, 1.0)];
        assert!(matches!(
            run(&bad, &one_message(), &SimConfig::new(Routing::Epidemic, 1, 100.0)),
            Err(SimError::MalformedTrace { .. })
        ));
        assert!(run(&[], &one_message(), &SimConfig::new(Routing::Epidemic, 1, 0.0)).is_err());
    }
}

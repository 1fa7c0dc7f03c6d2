use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpm_sync::{PayloadKind, Priority};
use serde::{Deserialize, Serialize};

use crate::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub time: f64,
    pub origin: String,
    pub destination: String,
    /// Record kind the message stands in for.
    pub size_kind: PayloadKind,
    pub priority: Priority,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub messages: Vec<Message>,
}

impl Workload {
    pub fn new(messages: Vec<Message>) -> Self {
        Self { messages }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (i, m) in self.messages.iter().enumerate() {
            let bad = |reason: &str| SimError::MalformedWorkload {
                index: i,
                reason: reason.to_string(),
            };
            if !m.time.is_finite() || m.time < 0.0 {
                return Err(bad("creation time must be finite and non-negative"));
            }
            if m.origin.is_empty() || m.destination.is_empty() {
                return Err(bad("empty node id"));
            }
            if m.origin == m.destination {
                return Err(bad("origin equals destination"));
            }
        }
        Ok(())
    }
}

impl Message {
    pub fn new(time: f64, origin: &str, destination: &str) -> Self {
        Self {
            time,
            origin: origin.to_string(),
            destination: destination.to_string(),
            size_kind: PayloadKind::ResponseSet,
            priority: Priority::Routine,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct WorkloadRow {
    time: f64,
    origin: String,
    destination: String,
    priority: Priority,
    #[serde(default)]
    size_kind: Option<PayloadKind>,
}

/// Reads CSV with header `time,origin,destination,priority`, plus an optional
/// `size_kind` column (`response_set` or `observation`).
pub fn read_workload_csv<R: Read>(reader: R) -> Result<Workload, SimError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut messages = Vec::new();
    for (i, row) in rdr.deserialize::<WorkloadRow>().enumerate() {
        let row = row.map_err(|e| SimError::MalformedWorkload {
            index: i,
            reason: e.to_string(),
        })?;
        let size_kind = row.size_kind.unwrap_or(PayloadKind::ResponseSet);
        if size_kind == PayloadKind::Ack {
            return Err(SimError::MalformedWorkload {
                index: i,
                reason: "acks are not workload messages".into(),
            });
        }
        messages.push(Message {
            time: row.time,
            origin: row.origin,
            destination: row.destination,
            size_kind,
            priority: row.priority,
        });
    }
    Ok(Workload { messages })
}

pub fn write_workload_csv<W: Write>(writer: W, workload: &Workload) -> Result<(), SimError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for m in &workload.messages {
        wtr.serialize(WorkloadRow {
            time: m.time,
            origin: m.origin.clone(),
            destination: m.destination.clone(),
            priority: m.priority,
            size_kind: Some(m.size_kind),
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Random messages between distinct nodes, created uniformly over
/// `[0, horizon)`, about one in five elevated.
pub fn generate_workload(nodes: &[String], n_messages: usize, horizon: f64, seed: u64) -> Workload {
    assert!(nodes.len() >= 2, "need two nodes for a workload");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut messages: Vec<Message> = (0..n_messages)
        .map(|_| {
            let o = rng.random_range(0..nodes.len());
            let mut d = rng.random_range(0..nodes.len() - 1);
            if d >= o {
                d += 1;
            }
            Message {
                time: rng.random_range(0.0..horizon),
                origin: nodes[o].clone(),
                destination: nodes[d].clone(),
                size_kind: if rng.random_bool(0.5) {
                    PayloadKind::ResponseSet
                } else {
                    PayloadKind::Observation
                },
                priority: if rng.random_bool(0.2) {
                    Priority::Elevated
                } else {
                    Priority::Routine
                },
            }
        })
        .collect();
    messages.sort_by(|a, b| a.time.total_cmp(&b.time));
    Workload { messages }
}

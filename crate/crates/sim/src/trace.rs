//! Contact traces: who meets whom, when, for how long.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::SimError;

pub const DEFAULT_CONTACT_DURATION: f64 = 60.0;
pub const DEFAULT_BANDWIDTH: f64 = 1.0;

/// One pairwise contact. Times and durations are seconds from the start of
/// the trace; bandwidth is bundles per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    pub time: f64,
    pub node_a: String,
    pub node_b: String,
    pub duration: f64,
    /// `None` falls back to the run's default bandwidth.
    pub bandwidth: Option<f64>,
}

impl ContactEvent {
    pub fn new(time: f64, a: &str, b: &str, duration: f64, bandwidth: f64) -> Self {
        Self {
            time,
            node_a: a.to_string(),
            node_b: b.to_string(),
            duration,
            bandwidth: Some(bandwidth),
        }
    }

    fn order_key(&self) -> (f64, &str, &str) {
        (self.time, &self.node_a, &self.node_b)
    }
}

/// Checks every row and that times never go backwards, then orders
/// simultaneous contacts lexically by `(time, node_a, node_b)`.
pub fn normalize(trace: &[ContactEvent]) -> Result<Vec<ContactEvent>, SimError> {
    let bad = |index: usize, reason: &str| SimError::MalformedTrace {
        index,
        reason: reason.to_string(),
    };
    for (i, e) in trace.iter().enumerate() {
        if !e.time.is_finite() || e.time < 0.0 {
            return Err(bad(i, "time must be finite and non-negative"));
        }
        if e.duration.is_nan() || e.duration <= 0.0 {
            return Err(bad(i, "duration must be positive"));
        }
        if e.bandwidth.is_some_and(|b| b.is_nan() || b < 0.0) {
            return Err(bad(i, "bandwidth must be non-negative"));
        }
        if e.node_a.is_empty() || e.node_b.is_empty() {
            return Err(bad(i, "empty node id"));
        }
        if e.node_a == e.node_b {
            return Err(bad(i, "contact with itself"));
        }
        if i > 0 && trace[i - 1].time > e.time {
            return Err(bad(i, "trace not sorted by time"));
        }
    }
    let mut sorted = trace.to_vec();
    sorted.sort_by(|x, y| {
        let (tx, ax, bx) = x.order_key();
        let (ty, ay, by) = y.order_key();
        tx.total_cmp(&ty).then(ax.cmp(ay)).then(bx.cmp(by))
    });
    Ok(sorted)
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    time: f64,
    node_a: String,
    node_b: String,
    duration: f64,
    bandwidth: Option<f64>,
}

/// Reads CSV with header `time,node_a,node_b,duration,bandwidth`. An empty
/// bandwidth cell means "use the default"; `inf` means unlimited.
pub fn read_trace_csv<R: Read>(reader: R) -> Result<Vec<ContactEvent>, SimError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<TraceRow>().enumerate() {
        let row = row.map_err(|e| SimError::MalformedTrace {
            index: i,
            reason: e.to_string(),
        })?;
        out.push(ContactEvent {
            time: row.time,
            node_a: row.node_a,
            node_b: row.node_b,
            duration: row.duration,
            bandwidth: row.bandwidth,
        });
    }
    Ok(out)
}

pub fn write_trace_csv<W: Write>(writer: W, trace: &[ContactEvent]) -> Result<(), SimError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for e in trace {
        wtr.serialize(TraceRow {
            time: e.time,
            node_a: e.node_a.clone(),
            node_b: e.node_b.clone(),
            duration: e.duration,
            bandwidth: e.bandwidth,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Node names `n0..n{N-1}`, zero-padded so lexical order is numeric order.
pub fn node_names(n_nodes: usize) -> Vec<String> {
    let width = n_nodes.saturating_sub(1).to_string().len();
    (0..n_nodes).map(|i| format!("n{i:0width$}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParams {
    pub duration: f64,
    pub bandwidth: f64,
}

impl Default for TraceParams {
    fn default() -> Self {
        Self {
            duration: DEFAULT_CONTACT_DURATION,
            bandwidth: DEFAULT_BANDWIDTH,
        }
    }
}

/// Synthetic trace in which every pair of nodes meets as an independent
/// Poisson process: gaps between a pair's contacts are exponential with
/// mean `1 / contact_rate` seconds.
pub fn generate_trace(
    n_nodes: usize,
    horizon: f64,
    contact_rate: f64,
    seed: u64,
) -> Result<Vec<ContactEvent>, SimError> {
    generate_trace_with(n_nodes, horizon, contact_rate, seed, TraceParams::default())
}

pub fn generate_trace_with(
    n_nodes: usize,
    horizon: f64,
    contact_rate: f64,
    seed: u64,
    params: TraceParams,
) -> Result<Vec<ContactEvent>, SimError> {
    if n_nodes < 2 {
        return Err(SimError::InvalidParameter("need at least two nodes".into()));
    }
    if !(contact_rate > 0.0 && contact_rate.is_finite()) {
        return Err(SimError::InvalidParameter("contact rate must be positive".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(SimError::InvalidParameter("horizon must be positive".into()));
    }
    let gap = Exp::new(contact_rate)
        .map_err(|e| SimError::InvalidParameter(format!("contact rate: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = node_names(n_nodes);
    let mut events = Vec::new();
    for i in 0..n_nodes {
        for j in (i + 1)..n_nodes {
            let mut t = gap.sample(&mut rng);
            while t <= horizon {
                events.push(ContactEvent::new(t, &names[i], &names[j], params.duration, params.bandwidth));
                t += gap.sample(&mut rng);
            }
        }
    }
    events.sort_by(|x, y| {
        x.time
            .total_cmp(&y.time)
            .then_with(|| x.node_a.cmp(&y.node_a))
            .then_with(|| x.node_b.cmp(&y.node_b))
    });
    Ok(events)
}

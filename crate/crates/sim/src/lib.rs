//! Contact-trace simulator for store-and-forward delivery.
//!
//! A run replays a [`ContactEvent`] trace against a [`Workload`] of messages,
//! driving one [`rpm_sync::NodeStore`] per node, and reports delivery
//! [`Metrics`]. Runs are pure functions of their inputs.

pub mod batch;
pub mod cli;
pub mod compare;
pub mod engine;
pub mod trace;
pub mod workload;

use thiserror::Error;

pub use batch::{run_many, run_many_parallel, run_many_sequential, Job};
pub use compare::{compare, Comparison, ComparisonRow};
pub use engine::{run, Metrics, MessageOutcome, Report, RunOutput, SimConfig, SimEvent, INFINITE_TTL};
pub use trace::{
    generate_trace, generate_trace_with, node_names, normalize, read_trace_csv, write_trace_csv,
    ContactEvent, TraceParams, DEFAULT_BANDWIDTH, DEFAULT_CONTACT_DURATION,
};
pub use workload::{generate_workload, read_workload_csv, write_workload_csv, Message, Workload};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("malformed trace at row {index}: {reason}")]
    MalformedTrace { index: usize, reason: String },
    #[error("malformed workload at row {index}: {reason}")]
    MalformedWorkload { index: usize, reason: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Sync(#[from] rpm_sync::SyncError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

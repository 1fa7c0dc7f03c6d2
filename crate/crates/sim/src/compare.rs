//! Side-by-side runs of several configurations on one trace and workload.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::batch::{run_many, Job};
use crate::engine::{Metrics, SimConfig};
use crate::trace::ContactEvent;
use crate::workload::Workload;
use crate::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub config: SimConfig,
    pub metrics: Metrics,
    pub mean_latency: Option<f64>,
    /// Differences from the first row. All zero for the first row itself.
    pub delta_delivery_ratio: f64,
    pub delta_mean_latency: Option<f64>,
    pub delta_overhead: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

/// Runs every configuration and reports each against the first.
pub fn compare(trace: &[ContactEvent], workload: &Workload, configs: &[SimConfig]) -> Result<Comparison, SimError> {
    if configs.len() < 2 {
        return Err(SimError::InvalidParameter("compare needs at least two configurations".into()));
    }
    let jobs: Vec<Job> = configs
        .iter()
        .map(|c| Job {
            trace: trace.to_vec(),
            workload: workload.clone(),
            config: c.clone(),
        })
        .collect();
    let metrics: Vec<Metrics> = run_many(&jobs)
        .into_iter()
        .map(|r| r.map(|out| out.report.metrics))
        .collect::<Result<_, _>>()?;

    let base = &metrics[0];
    let base_latency = base.mean_latency();
    let rows = configs
        .iter()
        .zip(&metrics)
        .map(|(config, m)| {
            let mean_latency = m.mean_latency();
            ComparisonRow {
                config: config.clone(),
                metrics: m.clone(),
                mean_latency,
                delta_delivery_ratio: m.delivery_ratio - base.delivery_ratio,
                delta_mean_latency: mean_latency.zip(base_latency).map(|(x, b)| x - b),
                delta_overhead: m.overhead - base.overhead,
            }
        })
        .collect();
    Ok(Comparison { rows })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

impl Comparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<4} {:<9} {:>8} {:>8} {:>9} {:>10} {:>10} {:>10} {:>10}",
            "row", "routing", "created", "deliv", "ratio", "mean_lat", "overhead", "d_ratio", "d_lat"
        )
        .unwrap();
        for (i, r) in self.rows.iter().enumerate() {
            let routing = serde_json::to_value(r.config.routing).unwrap();
            writeln!(
                out,
                "{:<4} {:<9} {:>8} {:>8} {:>9.4} {:>10} {:>10.3} {:>+10.4} {:>10}",
                i,
                routing.as_str().unwrap_or("?"),
                r.metrics.created,
                r.metrics.delivered,
                r.metrics.delivery_ratio,
                opt(r.mean_latency),
                r.metrics.overhead,
                r.delta_delivery_ratio,
                opt(r.delta_mean_latency),
            )
            .unwrap();
        }
        out
    }
}

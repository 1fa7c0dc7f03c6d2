//! Many independent runs at once. Each run is single-threaded; with the
//! `parallel` feature, runs are spread over a rayon pool.

use crate::engine::{run, RunOutput, SimConfig};
use crate::trace::ContactEvent;
use crate::workload::Workload;
use crate::SimError;

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub trace: Vec<ContactEvent>,
    pub workload: Workload,
    pub config: SimConfig,
}

impl Job {
    pub fn run(&self) -> Result<RunOutput, SimError> {
        run(&self.trace, &self.workload, &self.config)
    }
}

pub fn run_many_sequential(jobs: &[Job]) -> Vec<Result<RunOutput, SimError>> {
    jobs.iter().map(Job::run).collect()
}

#[cfg(feature = "parallel")]
pub fn run_many_parallel(jobs: &[Job]) -> Vec<Result<RunOutput, SimError>> {
    use rayon::prelude::*;
    jobs.par_iter().map(Job::run).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_many_parallel(jobs: &[Job]) -> Vec<Result<RunOutput, SimError>> {
    run_many_sequential(jobs)
}

/// Results come back in job order whichever backend runs them.
pub fn run_many(jobs: &[Job]) -> Vec<Result<RunOutput, SimError>> {
    run_many_parallel(jobs)
}

//! Screening cadence: when the next screening is due and how regularly a
//! patient has been screened.
//!
//! All arithmetic is in whole days on UTC timestamps; calendar months never
//! enter the picture.

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

/// Clinic baseline: one screening every six weeks.
pub const DEFAULT_INTERVAL_DAYS: u32 = 42;
pub const DEFAULT_GRACE_DAYS: u32 = 7;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("invalid timeline: {0}")]
    InvalidTimeline(&'static str),
    #[error("interval_days must be at least 1")]
    InvalidPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CadencePolicy {
    interval_days: u32,
    grace_days: u32,
}

impl CadencePolicy {
    pub fn new(interval_days: u32, grace_days: u32) -> Result<Self, ScheduleError> {
        if interval_days == 0 {
            return Err(ScheduleError::InvalidPolicy);
        }
        Ok(Self {
            interval_days,
            grace_days,
        })
    }

    pub fn interval_days(&self) -> u32 {
        self.interval_days
    }

    pub fn grace_days(&self) -> u32 {
        self.grace_days
    }

    pub fn interval(&self) -> Duration {
        Duration::days(i64::from(self.interval_days))
    }

    pub fn grace(&self) -> Duration {
        Duration::days(i64::from(self.grace_days))
    }
}

impl Default for CadencePolicy {
    fn default() -> Self {
        Self {
            interval_days: DEFAULT_INTERVAL_DAYS,
            grace_days: DEFAULT_GRACE_DAYS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreeningState {
    Upcoming,
    Due,
    Overdue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningStatus {
    pub state: ScreeningState,
    pub due_at: DateTime<Utc>,
    /// Id of the last completed response, when there is one.
    pub reference: Option<Uuid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AdherenceRecord {
    pub windows_elapsed: u64,
    pub windows_completed: u64,
}

/// Next due date: one interval after the last completion, or the enrollment
/// instant itself for the baseline screening.
pub fn next_due(
    last_completed_at: Option<DateTime<Utc>>,
    enrolled_at: DateTime<Utc>,
    policy: &CadencePolicy,
) -> Result<DateTime<Utc>, ScheduleError> {
    match last_completed_at {
        None => Ok(enrolled_at),
        Some(last) if last < enrolled_at => Err(ScheduleError::InvalidTimeline(
            "completion precedes enrollment",
        )),
        Some(last) => last
            .checked_add_signed(policy.interval())
            .ok_or(ScheduleError::InvalidTimeline("due date out of range")),
    }
}

pub fn status(now: DateTime<Utc>, due_at: DateTime<Utc>, policy: &CadencePolicy) -> ScreeningStatus {
    let state = if now < due_at {
        ScreeningState::Upcoming
    } else if due_at
        .checked_add_signed(policy.grace())
        .is_none_or(|end| now <= end)
    {
        ScreeningState::Due
    } else {
        ScreeningState::Overdue
    };
    ScreeningStatus {
        state,
        due_at,
        reference: None,
    }
}

/// Counts whole intervals since enrollment and how many of them contain at
/// least one completion. The partial window at `now` is not counted.
pub fn adherence(
    history: &[DateTime<Utc>],
    enrolled_at: DateTime<Utc>,
    now: DateTime<Utc>,
    policy: &CadencePolicy,
) -> Result<AdherenceRecord, ScheduleError> {
    if now < enrolled_at {
        return Err(ScheduleError::InvalidTimeline("now precedes enrollment"));
    }
    if history.windows(2).any(|w| w[0] > w[1]) {
        return Err(ScheduleError::InvalidTimeline("history not sorted"));
    }
    if history.first().is_some_and(|&t| t < enrolled_at) {
        return Err(ScheduleError::InvalidTimeline(
            "completion precedes enrollment",
        ));
    }

    let interval = policy.interval().num_seconds();
    let windows_elapsed = ((now - enrolled_at).num_seconds() / interval) as u64;

    let mut windows_completed = 0u64;
    let mut last_window = None;
    for &t in history {
        let window = ((t - enrolled_at).num_seconds() / interval) as u64;
        if window >= windows_elapsed {
            break;
        }
        if last_window != Some(window) {
            windows_completed += 1;
            last_window = Some(window);
        }
    }
    Ok(AdherenceRecord {
        windows_elapsed,
        windows_completed,
    })
}

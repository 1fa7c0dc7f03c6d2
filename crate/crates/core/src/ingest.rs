//! Consent-gated intake of sensor observations.
//!
//! Consent is granted per data type. A data type the subject never granted is
//! denied. Revoking consent stops future intake but leaves stored readings in
//! place.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

/// Allowed lead of `observed_at` over the ingestion clock.
pub const DEFAULT_MAX_SKEW: Duration = Duration::minutes(5);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub id: Uuid,
    pub subject_id: String,
    /// Open vocabulary, e.g. `heart_rate` or `spo2`.
    pub data_type: String,
    pub value: f64,
    pub unit: String,
    pub observed_at: DateTime<Utc>,
    /// Sensor or device identifier.
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsentDecision {
    Granted,
    Denied,
}

impl FromStr for ConsentDecision {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "granted" => Ok(Self::Granted),
            "denied" => Ok(Self::Denied),
            other => Err(IngestError::InvalidDecision(other.to_string())),
        }
    }
}

impl fmt::Display for ConsentDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Granted => "granted",
            Self::Denied => "denied",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsentSettings {
    pub subject_id: String,
    pub grants: BTreeMap<String, ConsentDecision>,
    pub updated_at: Option<DateTime<Utc>>,
}

impl ConsentSettings {
    pub fn new(subject_id: impl Into<String>) -> Self {
        Self {
            subject_id: subject_id.into(),
            grants: BTreeMap::new(),
            updated_at: None,
        }
    }

    pub fn allows(&self, data_type: &str) -> bool {
        self.grants.get(data_type) == Some(&ConsentDecision::Granted)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("unknown subject {0:?}")]
    UnknownSubject(String),
    #[error("invalid consent decision {0:?}")]
    InvalidDecision(String),
    #[error("no consent for data type {data_type:?}")]
    ConsentDenied { data_type: String },
    #[error("observation timestamp {observed_at} is ahead of the ingestion clock")]
    ClockSkew { observed_at: DateTime<Utc> },
    #[error("observation has an empty unit")]
    EmptyUnit,
    #[error("observation {0} already stored")]
    Duplicate(Uuid),
}

/// Checks an observation against the subject's consent and the ingestion clock.
pub fn check_observation(
    obs: &Observation,
    consent: &ConsentSettings,
    now: DateTime<Utc>,
    max_skew: Duration,
) -> Result<(), IngestError> {
    if obs.unit.trim().is_empty() {
        return Err(IngestError::EmptyUnit);
    }
    if obs.observed_at > now + max_skew {
        return Err(IngestError::ClockSkew {
            observed_at: obs.observed_at,
        });
    }
    if obs.subject_id != consent.subject_id || !consent.allows(&obs.data_type) {
        return Err(IngestError::ConsentDenied {
            data_type: obs.data_type.clone(),
        });
    }
    Ok(())
}

/// Half-open time range `[from, to)`; a missing bound is unbounded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeRange {
    pub from: Option<DateTime<Utc>>,
    pub to: Option<DateTime<Utc>>,
}

impl TimeRange {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn between(from: DateTime<Utc>, to: DateTime<Utc>) -> Self {
        Self {
            from: Some(from),
            to: Some(to),
        }
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.from.is_none_or(|f| t >= f) && self.to.is_none_or(|e| t < e)
    }
}

/// Consent records and stored observations for a set of known subjects.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservationStore {
    subjects: BTreeSet<String>,
    consents: BTreeMap<String, ConsentSettings>,
    observations: BTreeMap<String, Vec<Observation>>,
    ids: BTreeSet<Uuid>,
}

impl ObservationStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_subject(&mut self, subject_id: impl Into<String>) {
        let id = subject_id.into();
        self.consents
            .entry(id.clone())
            .or_insert_with(|| ConsentSettings::new(id.clone()));
        self.subjects.insert(id);
    }

    pub fn knows(&self, subject_id: &str) -> bool {
        self.subjects.contains(subject_id)
    }

    pub fn consent(&self, subject_id: &str) -> Option<&ConsentSettings> {
        self.consents.get(subject_id)
    }

    pub fn set_consent(
        &mut self,
        subject_id: &str,
        data_type: &str,
        decision: ConsentDecision,
        at: DateTime<Utc>,
    ) -> Result<ConsentSettings, IngestError> {
        let settings = self
            .consents
            .get_mut(subject_id)
            .ok_or_else(|| IngestError::UnknownSubject(subject_id.to_string()))?;
        settings.grants.insert(data_type.to_string(), decision);
        settings.updated_at = Some(at);
        Ok(settings.clone())
    }

    /// Validates and stores an observation. Stored readings are never altered.
    pub fn record_observation(
        &mut self,
        obs: Observation,
        now: DateTime<Utc>,
        max_skew: Duration,
    ) -> Result<(), IngestError> {
        self.check(&obs, now, max_skew)?;
        self.insert_unchecked(obs);
        Ok(())
    }

    pub fn check(
        &self,
        obs: &Observation,
        now: DateTime<Utc>,
        max_skew: Duration,
    ) -> Result<(), IngestError> {
        let consent = self
            .consents
            .get(&obs.subject_id)
            .ok_or_else(|| IngestError::UnknownSubject(obs.subject_id.clone()))?;
        if self.ids.contains(&obs.id) {
            return Err(IngestError::Duplicate(obs.id));
        }
        check_observation(obs, consent, now, max_skew)
    }

    /// Stores an observation that already passed [`Self::check`]. Used when
    /// replaying persisted history.
    pub fn insert_unchecked(&mut self, obs: Observation) {
        self.ids.insert(obs.id);
        let list = self.observations.entry(obs.subject_id.clone()).or_default();
        let pos = list.partition_point(|o| (o.observed_at, o.id) <= (obs.observed_at, obs.id));
        list.insert(pos, obs);
    }

    /// Observations for a subject, ascending by `observed_at`.
    pub fn query_observations(
        &self,
        subject_id: &str,
        data_type: Option<&str>,
        range: TimeRange,
    ) -> Vec<Observation> {
        self.observations
            .get(subject_id)
            .map(|list| {
                list.iter()
                    .filter(|o| data_type.is_none_or(|t| o.data_type == t))
                    .filter(|o| range.contains(o.observed_at))
                    .cloned()
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

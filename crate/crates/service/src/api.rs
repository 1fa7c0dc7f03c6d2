//! The clinic service: every operation authenticates, authorizes, writes at
//! most one event and exactly one audit entry.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use rpm_core::{
    compute_distress_summary, next_due, score_sus, status, validate_response, ConsentDecision,
    ConsentSettings, IngestError, Instrument, Observation, ResponseSet, ScreeningStatus,
    SusResponse, TimeRange, Violation,
};
use rpm_sync::{payload, resolve_conflict, Bundle, BundleId, PayloadKind, Receipt, RecordVersion};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::audit::{AuditAction, AuditEntry, AuditLog, Outcome};
use crate::auth::{new_token, Credential, Role, UserAccount};
use crate::clock::Clock;
use crate::config::ServiceConfig;
use crate::journal::{Journal, StorageError};
use crate::state::{BundleRecord, Event, EventKind, State, StoredScreening, SusRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthReason {
    InvalidToken,
    BadCredentials,
    Forbidden,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum ApiError {
    #[error("authentication failed: {reason:?}")]
    AuthFailure { reason: AuthReason },
    #[error("validation failed: {message}")]
    ValidationFailure {
        message: String,
        violations: Vec<Violation>,
    },
    #[error("response {id} already submitted")]
    DuplicateSubmission { id: Uuid },
    #[error("unknown subject {subject_id:?}")]
    UnknownSubject { subject_id: String },
    #[error("user {user_id:?} already exists")]
    UserExists { user_id: String },
    #[error("storage failure: {message}")]
    StorageFailure { message: String },
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::AuthFailure { .. } => "AuthFailure",
            ApiError::ValidationFailure { .. } => "ValidationFailure",
            ApiError::DuplicateSubmission { .. } => "DuplicateSubmission",
            ApiError::UnknownSubject { .. } => "UnknownSubject",
            ApiError::UserExists { .. } => "UserExists",
            ApiError::StorageFailure { .. } => "StorageFailure",
        }
    }

    fn auth(reason: AuthReason) -> Self {
        ApiError::AuthFailure { reason }
    }

    fn invalid(message: impl Into<String>) -> Self {
        ApiError::ValidationFailure {
            message: message.into(),
            violations: Vec::new(),
        }
    }
}

impl From<StorageError> for ApiError {
    fn from(e: StorageError) -> Self {
        ApiError::StorageFailure { message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BundleStatus {
    Delivered,
    /// Already received; the original ack is returned again.
    Duplicate,
    /// Held for relaying; not addressed to this node.
    Stored,
    Rejected { code: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleResult {
    pub id: BundleId,
    #[serde(flatten)]
    pub status: BundleStatus,
    pub ack: Option<Bundle>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningView {
    pub response: ResponseSet,
    pub summary: Option<rpm_core::DistressSummary>,
}

const EVENTS_FILE: &str = "events.jsonl";
const AUDIT_FILE: &str = "audit.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";

pub struct Service {
    config: ServiceConfig,
    policy: rpm_core::CadencePolicy,
    clock: Arc<dyn Clock>,
    dt: Instrument,
    state: State,
    history: Vec<Event>,
    journal: Journal<Event>,
    audit: AuditLog,
    sessions: HashMap<String, String>,
    snapshot_path: Option<PathBuf>,
}

impl Service {
    /// A service with no persistence, for tests and embedding.
    pub fn in_memory(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ApiError> {
        let policy = config.policy().map_err(|e| ApiError::invalid(e.to_string()))?;
        Ok(Self {
            state: State::new(&config.node_id),
            config,
            policy,
            clock,
            dt: Instrument::distress_thermometer(),
            history: Vec::new(),
            journal: Journal::in_memory(),
            audit: AuditLog::in_memory(),
            sessions: HashMap::new(),
            snapshot_path: None,
        })
    }

    /// Opens the data directory, restoring from the latest snapshot plus the
    /// events after it.
    pub fn open(config: ServiceConfig, clock: Arc<dyn Clock>) -> Result<Self, ApiError> {
        let dir = config.data_dir.clone();
        std::fs::create_dir_all(&dir).map_err(|e| ApiError::StorageFailure {
            message: format!("{}: {e}", dir.display()),
        })?;
        let mut svc = Self::in_memory(config, clock)?;
        let (journal, events) = Journal::<Event>::open(&dir.join(EVENTS_FILE))?;
        let snapshot_path = dir.join(SNAPSHOT_FILE);
        let mut state = match std::fs::read(&snapshot_path) {
            Ok(bytes) => serde_json::from_slice::<State>(&bytes).map_err(|e| ApiError::StorageFailure {
                message: format!("snapshot: {e}"),
            })?,
            Err(_) => State::new(&svc.config.node_id),
        };
        for (i, e) in events.iter().enumerate() {
            if e.seq != i as u64 + 1 {
                return Err(ApiError::StorageFailure {
                    message: format!("event seq {} at position {}", e.seq, i + 1),
                });
            }
        }
        if state.last_seq > events.len() as u64 {
            // Snapshot ahead of a truncated log: the log is the authority.
            state = State::new(&svc.config.node_id);
        }
        for e in &events[state.last_seq as usize..] {
            state.apply(e);
        }
        svc.state = state;
        svc.history = events;
        svc.journal = journal;
        svc.audit = AuditLog::open(&dir.join(AUDIT_FILE))?;
        svc.snapshot_path = Some(snapshot_path);
        Ok(svc)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn events(&self) -> &[Event] {
        &self.history
    }

    pub fn audit_entries(&self) -> &[AuditEntry] {
        self.audit.entries()
    }

    pub fn node_id(&self) -> &str {
        self.state.node.node_id().as_str()
    }

    fn append(&mut self, kind: EventKind) -> Result<Option<Receipt>, ApiError> {
        let event = Event {
            seq: self.state.last_seq + 1,
            at: self.clock.now(),
            kind,
        };
        self.journal.append(&event)?;
        let receipt = self.state.apply(&event);
        self.history.push(event);
        self.maybe_snapshot()?;
        Ok(receipt)
    }

    fn maybe_snapshot(&self) -> Result<(), ApiError> {
        let (Some(path), n) = (&self.snapshot_path, self.config.snapshot_every) else {
            return Ok(());
        };
        if n == 0 || !self.state.last_seq.is_multiple_of(n) {
            return Ok(());
        }
        let tmp = path.with_extension("json.tmp");
        let body = serde_json::to_vec(&self.state).expect("state serializes");
        std::fs::write(&tmp, body)
            .and_then(|_| std::fs::rename(&tmp, path))
            .map_err(|e| ApiError::StorageFailure {
                message: format!("snapshot: {e}"),
            })
    }

    /// Writes the single audit entry for a call and passes its result through.
    fn audited<T>(
        &mut self,
        actor: &str,
        action: AuditAction,
        target: &str,
        result: Result<T, ApiError>,
    ) -> Result<T, ApiError> {
        let (outcome, detail) = match &result {
            Ok(_) => (Outcome::Allowed, None),
            Err(ApiError::AuthFailure { .. }) => (Outcome::Denied, None),
            Err(e) => (Outcome::Allowed, Some(e.code().to_string())),
        };
        self.audit
            .record(self.clock.now(), actor, action, target, outcome, detail)?;
        result
    }

    fn caller(&self, token: &str) -> Result<UserAccount, ApiError> {
        self.sessions
            .get(token)
            .and_then(|uid| self.state.users.get(uid))
            .map(|u| u.account.clone())
            .ok_or(ApiError::auth(AuthReason::InvalidToken))
    }

    fn actor_of(&self, token: &str) -> String {
        self.sessions.get(token).cloned().unwrap_or_default()
    }

    /// Administrative account creation (the CLI `add-user`).
    pub fn register_user(
        &mut self,
        user_id: &str,
        role: Role,
        linked_subjects: impl IntoIterator<Item = String>,
        password: &str,
    ) -> Result<UserAccount, ApiError> {
        let result = (|| {
            if user_id.trim().is_empty() || password.is_empty() {
                return Err(ApiError::invalid("user id and password are required"));
            }
            if self.state.users.contains_key(user_id) {
                return Err(ApiError::UserExists {
                    user_id: user_id.to_string(),
                });
            }
            let account = UserAccount::new(user_id, role, linked_subjects, self.clock.now());
            self.append(EventKind::UserRegistered {
                account: account.clone(),
                credential: Credential::create(password),
            })?;
            Ok(account)
        })();
        self.audited("admin", AuditAction::Write, user_id, result)
    }

    pub fn login(&mut self, user_id: &str, password: &str) -> Result<String, ApiError> {
        let ok = self
            .state
            .users
            .get(user_id)
            .is_some_and(|u| u.credential.verify(password));
        let result = if ok {
            let token = new_token();
            self.sessions.insert(token.clone(), user_id.to_string());
            Ok(token)
        } else {
            Err(ApiError::auth(AuthReason::BadCredentials))
        };
        self.audited(user_id, AuditAction::Login, user_id, result)
    }

    pub fn logout(&mut self, token: &str) {
        self.sessions.remove(token);
    }

    /// Checks a response for storage as a screening of its own subject.
    fn vet_response(&self, response: &ResponseSet) -> Result<Option<rpm_core::DistressSummary>, ApiError> {
        let patient = self
            .state
            .patient(&response.subject_id)
            .ok_or_else(|| ApiError::UnknownSubject {
                subject_id: response.subject_id.clone(),
            })?;
        let verdict = validate_response(&self.dt, response).map_err(|e| ApiError::invalid(e.to_string()))?;
        if !verdict.is_ok() {
            return Err(ApiError::ValidationFailure {
                message: format!("{} violation(s)", verdict.violations.len()),
                violations: verdict.violations,
            });
        }
        let now = self.clock.now();
        if response.completed_at < patient.enrolled_at || response.completed_at > now + self.max_skew() {
            return Err(ApiError::invalid("completed_at must lie between enrollment and now"));
        }
        Ok(compute_distress_summary(&self.dt, response, self.config.distress_threshold).ok())
    }

    fn max_skew(&self) -> Duration {
        Duration::seconds(self.config.max_skew_seconds)
    }

    pub fn submit_response(&mut self, token: &str, response: ResponseSet) -> Result<Uuid, ApiError> {
        let actor = self.actor_of(token);
        let id = response.id;
        let result = (|| {
            let user = self.caller(token)?;
            if !user.may_write(&response.subject_id) {
                return Err(ApiError::auth(AuthReason::Forbidden));
            }
            let summary = self.vet_response(&response)?;
            if self.state.screenings.contains_key(&id) {
                return Err(ApiError::DuplicateSubmission { id });
            }
            let version = RecordVersion {
                record_id: id.to_string(),
                lamport: 0,
                origin: response.subject_id.as_str().into(),
            };
            self.append(EventKind::ResponseAccepted {
                screening: StoredScreening {
                    response,
                    summary,
                    version,
                },
            })?;
            Ok(id)
        })();
        self.audited(&actor, AuditAction::Write, &id.to_string(), result)
    }

    /// Takes in bundles carried by any authenticated device. Records inside
    /// are accepted only from their subject's own device.
    pub fn receive_bundles(&mut self, token: &str, bundles: Vec<Bundle>) -> Result<Vec<BundleResult>, ApiError> {
        let actor = self.actor_of(token);
        let target = format!("bundles:{}", bundles.len());
        let result = (|| {
            self.caller(token)?;
            let mut out = Vec::with_capacity(bundles.len());
            for b in bundles {
                out.push(self.receive_one(b)?);
            }
            Ok(out)
        })();
        self.audited(&actor, AuditAction::Write, &target, result)
    }

    fn receive_one(&mut self, bundle: Bundle) -> Result<BundleResult, ApiError> {
        let id = bundle.id;
        let now = self.clock.now();
        let rejected = |code: &str, detail: String| BundleResult {
            id,
            status: BundleStatus::Rejected {
                code: code.to_string(),
                detail,
            },
            ack: None,
        };
        if bundle.is_expired(now) {
            return Ok(rejected("Expired", format!("expired at {:?}", bundle.expires_at())));
        }
        let node = &self.state.node;
        if node.holds(&id) || node.is_delivered(&id) || node.is_acked(&id) {
            return Ok(BundleResult {
                id,
                status: BundleStatus::Duplicate,
                ack: self.state.ack_for(&id).cloned(),
            });
        }
        if !bundle.destination.is(node.node_id()) || bundle.kind == PayloadKind::Ack {
            self.append(EventKind::BundleReceived { bundle, record: None })?;
            return Ok(BundleResult {
                id,
                status: BundleStatus::Stored,
                ack: None,
            });
        }
        let record = match self.vet_bundle(&bundle) {
            Ok(r) => r,
            Err((code, detail)) => return Ok(rejected(code, detail)),
        };
        let receipt = self.append(EventKind::BundleReceived { bundle, record })?;
        let ack = match receipt {
            Some(Receipt::Delivered { ack }) => self.state.node.get(&ack).cloned(),
            _ => None,
        };
        Ok(BundleResult {
            id,
            status: BundleStatus::Delivered,
            ack,
        })
    }

    /// Decides what a bundle addressed here contributes to state.
    fn vet_bundle(&self, bundle: &Bundle) -> Result<Option<BundleRecord>, (&'static str, String)> {
        let plain = payload::open(&bundle.payload);
        match bundle.kind {
            PayloadKind::ResponseSet => {
                let response: ResponseSet =
                    serde_json::from_slice(&plain).map_err(|e| ("MalformedBundle", e.to_string()))?;
                if bundle.origin.as_str() != response.subject_id {
                    return Err(("AuthFailure", "response origin is not its subject".into()));
                }
                let summary = self.vet_response(&response).map_err(|e| (e.code(), e.to_string()))?;
                let incoming = StoredScreening {
                    version: RecordVersion {
                        record_id: response.id.to_string(),
                        lamport: bundle.lamport,
                        origin: bundle.origin.clone(),
                    },
                    response,
                    summary,
                };
                Ok(match self.state.screenings.get(&incoming.response.id) {
                    None => Some(BundleRecord::Screening(incoming)),
                    Some(existing) if existing.response == incoming.response => None,
                    Some(existing) => {
                        let (_, winner) = resolve_conflict(
                            (&existing.version, existing),
                            (&incoming.version, &incoming),
                        );
                        (winner == &incoming).then(|| BundleRecord::Screening(incoming.clone()))
                    }
                })
            }
            PayloadKind::Observation => {
                let obs: Observation =
                    serde_json::from_slice(&plain).map_err(|e| ("MalformedBundle", e.to_string()))?;
                if bundle.origin.as_str() != obs.subject_id {
                    return Err(("AuthFailure", "observation origin is not its subject".into()));
                }
                match self.state.observations.check(&obs, self.clock.now(), self.max_skew()) {
                    Ok(()) => Ok(Some(BundleRecord::Observation(obs))),
                    Err(IngestError::Duplicate(_)) => Ok(None),
                    Err(e) => Err((ingest_code(&e), e.to_string())),
                }
            }
            PayloadKind::Ack => Ok(None),
        }
    }

    pub fn get_screenings(
        &mut self,
        token: &str,
        subject_id: &str,
        range: TimeRange,
    ) -> Result<Vec<ScreeningView>, ApiError> {
        let actor = self.actor_of(token);
        let result = self.authorize_read(token, subject_id).map(|()| {
            self.state
                .screenings_of(subject_id)
                .into_iter()
                .filter(|s| range.contains(s.response.completed_at))
                .map(|s| ScreeningView {
                    response: s.response.clone(),
                    summary: s.summary.clone(),
                })
                .collect()
        });
        self.audited(&actor, AuditAction::Read, subject_id, result)
    }

    pub fn get_due(
        &mut self,
        token: &str,
        subject_id: &str,
        now: Option<DateTime<Utc>>,
    ) -> Result<ScreeningStatus, ApiError> {
        let actor = self.actor_of(token);
        let result = (|| {
            self.authorize_read(token, subject_id)?;
            let patient = self.state.patient(subject_id).ok_or_else(|| ApiError::UnknownSubject {
                subject_id: subject_id.to_string(),
            })?;
            let last = self.state.screenings_of(subject_id).last().map(|s| &s.response);
            let due = next_due(last.map(|r| r.completed_at), patient.enrolled_at, &self.policy)
                .map_err(|e| ApiError::invalid(e.to_string()))?;
            let mut st = status(now.unwrap_or_else(|| self.clock.now()), due, &self.policy);
            st.reference = last.map(|r| r.id);
            Ok(st)
        })();
        self.audited(&actor, AuditAction::Read, subject_id, result)
    }

    pub fn get_observations(
        &mut self,
        token: &str,
        subject_id: &str,
        data_type: Option<&str>,
        range: TimeRange,
    ) -> Result<Vec<Observation>, ApiError> {
        let actor = self.actor_of(token);
        let result = self
            .authorize_read(token, subject_id)
            .map(|()| self.state.observations.query_observations(subject_id, data_type, range));
        self.audited(&actor, AuditAction::Read, subject_id, result)
    }

    pub fn set_consent(
        &mut self,
        token: &str,
        subject_id: &str,
        data_type: &str,
        decision: &str,
    ) -> Result<ConsentSettings, ApiError> {
        let actor = self.actor_of(token);
        let result = (|| {
            let user = self.caller(token)?;
            if !user.may_write(subject_id) {
                return Err(ApiError::auth(AuthReason::Forbidden));
            }
            let decision: ConsentDecision = decision.parse().map_err(|e: IngestError| ApiError::invalid(e.to_string()))?;
            if data_type.trim().is_empty() {
                return Err(ApiError::invalid("data_type must not be empty"));
            }
            if !self.state.observations.knows(subject_id) {
                return Err(ApiError::UnknownSubject {
                    subject_id: subject_id.to_string(),
                });
            }
            self.append(EventKind::ConsentChanged {
                subject_id: subject_id.to_string(),
                data_type: data_type.to_string(),
                decision,
            })?;
            Ok(self
                .state
                .observations
                .consent(subject_id)
                .cloned()
                .expect("subject registered"))
        })();
        self.audited(&actor, AuditAction::ConsentChange, subject_id, result)
    }

    /// Any signed-in user may rate a tool; repeated ratings are all kept.
    pub fn submit_sus(&mut self, token: &str, items: &[i64], tool_label: &str) -> Result<f64, ApiError> {
        let actor = self.actor_of(token);
        let result = (|| {
            let user = self.caller(token)?;
            let response = SusResponse::new(items).map_err(|e| ApiError::invalid(e.to_string()))?;
            let score = score_sus(&response);
            self.append(EventKind::SusRecorded {
                record: SusRecord {
                    user_id: user.user_id.clone(),
                    role: user.role,
                    tool_label: tool_label.to_string(),
                    response,
                    score,
                    at: self.clock.now(),
                },
            })?;
            Ok(score)
        })();
        self.audited(&actor, AuditAction::Write, &format!("sus:{tool_label}"), result)
    }

    /// Provider-only. Returns entries written before this call.
    pub fn read_audit(&mut self, token: &str, range: TimeRange) -> Result<Vec<AuditEntry>, ApiError> {
        let actor = self.actor_of(token);
        let result = self.caller(token).and_then(|u| {
            if u.role == Role::Provider {
                Ok(self.audit.in_range(range))
            } else {
                Err(ApiError::auth(AuthReason::Forbidden))
            }
        });
        self.audited(&actor, AuditAction::Read, "audit", result)
    }

    fn authorize_read(&self, token: &str, subject_id: &str) -> Result<(), ApiError> {
        let user = self.caller(token)?;
        if user.may_read(subject_id) {
            Ok(())
        } else {
            Err(ApiError::auth(AuthReason::Forbidden))
        }
    }
}

fn ingest_code(e: &IngestError) -> &'static str {
    match e {
        IngestError::UnknownSubject(_) => "UnknownSubject",
        IngestError::ConsentDenied { .. } => "ConsentDenied",
        IngestError::ClockSkew { .. } => "ClockSkew",
        IngestError::InvalidDecision(_) | IngestError::EmptyUnit => "ValidationFailure",
        IngestError::Duplicate(_) => "DuplicateSubmission",
    }
}

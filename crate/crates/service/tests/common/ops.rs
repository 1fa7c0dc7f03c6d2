//! Random operation sequences against a [`Service`], with bookkeeping for
//! the audit-count and authorization oracles.

use chrono::Duration;
use proptest::prelude::*;
use rpm_core::{Answer, EntryMode, Instrument, Observation, TimeRange};
use rpm_service::{ApiError, Clock, ManualClock, Service, State};
use rpm_sync::NodeStore;
use uuid::Uuid;

use super::dt_response;

pub const USERS: [&str; 5] = ["p1", "p2", "c1", "dr", "o1"];
pub const SUBJECTS: [&str; 3] = ["p1", "p2", "ghost"];
const DATA_TYPES: [&str; 3] = ["heart_rate", "spo2", "steps"];
const DECISIONS: [&str; 3] = ["granted", "denied", "perhaps"];
const PROBLEMS: [&str; 4] = ["pain", "worry", "housing", "fatigue"];

#[derive(Debug, Clone)]
pub enum Op {
    Login { user: usize, correct: bool },
    Submit { actor: usize, subject: usize, distress: i64, problems: u8, paper: bool, resend: bool },
    ResponseBundle { subject: usize, carrier: usize, distress: i64 },
    ObservationBundle { subject: usize, carrier: usize, data_type: usize, ahead_days: i64 },
    Consent { actor: usize, subject: usize, data_type: usize, decision: usize },
    Screenings { actor: usize, subject: usize },
    Due { actor: usize, subject: usize },
    Observations { actor: usize, subject: usize },
    Sus { actor: usize, len: usize, value: i64 },
    Audit { actor: usize },
    BadToken { subject: usize },
    Advance { minutes: i64 },
}

pub fn arb_op() -> impl Strategy<Value = Op> {
    let u = 0..USERS.len();
    let s = 0..SUBJECTS.len();
    prop_oneof![
        (u.clone(), any::<bool>()).prop_map(|(user, correct)| Op::Login { user, correct }),
        (u.clone(), s.clone(), -1i64..12, any::<u8>(), prop::bool::weighted(0.1), prop::bool::weighted(0.2))
            .prop_map(|(actor, subject, distress, problems, paper, resend)| Op::Submit { actor, subject, distress, problems, paper, resend }),
        (s.clone(), u.clone(), 0i64..11).prop_map(|(subject, carrier, distress)| Op::ResponseBundle { subject, carrier, distress }),
        (s.clone(), u.clone(), 0..DATA_TYPES.len(), prop_oneof![Just(0i64), Just(0), Just(400)])
            .prop_map(|(subject, carrier, data_type, ahead_days)| Op::ObservationBundle { subject, carrier, data_type, ahead_days }),
        (u.clone(), s.clone(), 0..DATA_TYPES.len(), 0..DECISIONS.len())
            .prop_map(|(actor, subject, data_type, decision)| Op::Consent { actor, subject, data_type, decision }),
        (u.clone(), s.clone()).prop_map(|(actor, subject)| Op::Screenings { actor, subject }),
        (u.clone(), s.clone()).prop_map(|(actor, subject)| Op::Due { actor, subject }),
        (u.clone(), s.clone()).prop_map(|(actor, subject)| Op::Observations { actor, subject }),
        (u.clone(), prop_oneof![Just(10usize), Just(9)], 0i64..7).prop_map(|(actor, len, value)| Op::Sus { actor, len, value }),
        u.prop_map(|actor| Op::Audit { actor }),
        s.prop_map(|subject| Op::BadToken { subject }),
        (1i64..3000).prop_map(|minutes| Op::Advance { minutes }),
    ]
}

pub struct Driver {
    pub svc: Service,
    pub clock: ManualClock,
    tokens: Vec<Option<String>>,
    devices: Vec<NodeStore>,
    last_response: Option<rpm_core::ResponseSet>,
    /// Service calls made so far; each must leave one audit entry.
    pub calls: usize,
    /// Live state after each event, indexed by seq.
    pub states: Vec<State>,
    pub unauthorized_reads: usize,
}

impl Driver {
    /// Takes an empty service and registers the standard users.
    pub fn new(svc: Service, clock: ManualClock) -> Self {
        let calls = svc.audit_entries().len();
        let mut d = Self {
            states: vec![State::new(svc.node_id())],
            tokens: vec![None; USERS.len()],
            devices: SUBJECTS.iter().map(|s| NodeStore::new(*s)).collect(),
            last_response: None,
            calls,
            unauthorized_reads: 0,
            svc,
            clock,
        };
        d.record_states();
        for (user, role, links) in super::USER_TABLE {
            let links = links.iter().map(|s| s.to_string());
            d.svc.register_user(user, role, links, &format!("pw-{user}")).unwrap();
            d.calls += 1;
            d.record_states();
        }
        for user in 0..USERS.len() {
            d.apply(&Op::Login { user, correct: true });
        }
        d
    }

    fn record_states(&mut self) {
        while self.states.len() <= self.svc.state().last_seq as usize {
            // Each call appends at most one event in this driver.
            self.states.push(self.svc.state().clone());
        }
    }

    fn token(&self, actor: usize) -> String {
        self.tokens[actor].clone().unwrap_or_else(|| "stale-token".into())
    }

    fn linked(&self, actor: usize, subject: &str) -> bool {
        self.svc
            .state()
            .users
            .get(USERS[actor])
            .is_some_and(|u| u.account.linked_subjects.contains(subject))
    }

    fn check_read<T>(&mut self, actor: usize, subject: &str, r: &Result<T, ApiError>) {
        if r.is_ok() && !self.linked(actor, subject) {
            self.unauthorized_reads += 1;
        }
    }

    pub fn apply(&mut self, op: &Op) {
        let now = self.clock.now();
        self.calls += 1;
        match *op {
            Op::Login { user, correct } => {
                let pw = if correct { format!("pw-{}", USERS[user]) } else { "nope".into() };
                if let Ok(t) = self.svc.login(USERS[user], &pw) {
                    self.tokens[user] = Some(t);
                }
            }
            Op::Submit { actor, subject, distress, problems, paper, resend } => {
                let r = match (&self.last_response, resend) {
                    (Some(prev), true) => prev.clone(),
                    _ => {
                        let mut r = dt_response(SUBJECTS[subject], distress, &[], now);
                        for (i, p) in PROBLEMS.iter().enumerate() {
                            if problems & (1 << i) != 0 {
                                r.answers.insert(p.to_string(), Answer::Boolean(true));
                            }
                        }
                        if paper {
                            r.entry_mode = EntryMode::Paper;
                            r.answers.clear();
                            r.attachment = Some(format!("scan-{}", r.id));
                        }
                        r
                    }
                };
                self.last_response = Some(r.clone());
                let _ = self.svc.submit_response(&self.token(actor), r);
            }
            Op::ResponseBundle { subject, carrier, distress } => {
                let r = dt_response(SUBJECTS[subject], distress, &[], now);
                let b = rpm_service::device::package_response(
                    &mut self.devices[subject],
                    "clinic",
                    &Instrument::distress_thermometer(),
                    &r,
                    4,
                    86_400,
                    now,
                )
                .unwrap();
                let _ = self.svc.receive_bundles(&self.token(carrier), vec![b]);
            }
            Op::ObservationBundle { subject, carrier, data_type, ahead_days } => {
                let o = Observation {
                    id: Uuid::new_v4(),
                    subject_id: SUBJECTS[subject].into(),
                    data_type: DATA_TYPES[data_type].into(),
                    value: 1.0,
                    unit: "u".into(),
                    observed_at: now + Duration::days(ahead_days),
                    source: "dev".into(),
                };
                let b = rpm_service::device::package_observation(&mut self.devices[subject], "clinic", &o, 86_400, now).unwrap();
                let _ = self.svc.receive_bundles(&self.token(carrier), vec![b]);
            }
            Op::Consent { actor, subject, data_type, decision } => {
                let _ = self.svc.set_consent(&self.token(actor), SUBJECTS[subject], DATA_TYPES[data_type], DECISIONS[decision]);
            }
            Op::Screenings { actor, subject } => {
                let r = self.svc.get_screenings(&self.token(actor), SUBJECTS[subject], TimeRange::all());
                if let Ok(list) = &r {
                    assert!(list.iter().all(|s| s.response.subject_id == SUBJECTS[subject]));
                }
                self.check_read(actor, SUBJECTS[subject], &r);
            }
            Op::Due { actor, subject } => {
                let r = self.svc.get_due(&self.token(actor), SUBJECTS[subject], None);
                self.check_read(actor, SUBJECTS[subject], &r);
            }
            Op::Observations { actor, subject } => {
                let r = self.svc.get_observations(&self.token(actor), SUBJECTS[subject], None, TimeRange::all());
                if let Ok(list) = &r {
                    assert!(list.iter().all(|o| o.subject_id == SUBJECTS[subject]));
                }
                self.check_read(actor, SUBJECTS[subject], &r);
            }
            Op::Sus { actor, len, value } => {
                let _ = self.svc.submit_sus(&self.token(actor), &vec![value; len], "digital");
            }
            Op::Audit { actor } => {
                let _ = self.svc.read_audit(&self.token(actor), TimeRange::all());
            }
            Op::BadToken { subject } => {
                let r = self.svc.get_screenings("forged", SUBJECTS[subject], TimeRange::all());
                assert!(r.is_err());
            }
            Op::Advance { minutes } => {
                self.calls -= 1;
                self.clock.advance(Duration::minutes(minutes));
            }
        }
        self.record_states();
    }
}

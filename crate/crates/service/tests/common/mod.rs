#![allow(dead_code)]

pub mod ops;

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rpm_core::{Answer, EntryMode, ResponseSet};
use rpm_service::{ManualClock, Role, Service, ServiceConfig};
use uuid::Uuid;

pub fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2019, 1, 1, 9, 0, 0).unwrap()
}

pub fn days(n: i64) -> Duration {
    Duration::days(n)
}

pub struct Fixture {
    pub svc: Service,
    pub clock: ManualClock,
}

/// Patients p1, p2; caregiver c1 linked to p1; provider dr linked to both;
/// other o1 linked to nothing.
pub fn fixture() -> Fixture {
    let clock = ManualClock::new(t0());
    let mut svc = Service::in_memory(ServiceConfig::default(), Arc::new(clock.clone())).unwrap();
    seed_users(&mut svc);
    Fixture { svc, clock }
}

pub const USER_TABLE: [(&str, Role, &[&str]); 5] = [
    ("p1", Role::Patient, &[]),
    ("p2", Role::Patient, &[]),
    ("c1", Role::Caregiver, &["p1"]),
    ("dr", Role::Provider, &["p1", "p2"]),
    ("o1", Role::Other, &[]),
];

pub fn seed_users(svc: &mut Service) {
    for (user, role, links) in USER_TABLE {
        let links = links.iter().map(|s| s.to_string());
        svc.register_user(user, role, links, &format!("pw-{user}")).unwrap();
    }
}

pub fn login(svc: &mut Service, user: &str) -> String {
    svc.login(user, &format!("pw-{user}")).unwrap()
}

pub fn dt_response(subject: &str, distress: i64, problems: &[&str], at: DateTime<Utc>) -> ResponseSet {
    let mut answers = BTreeMap::from([("distress".to_string(), Answer::Scale(distress))]);
    for p in problems {
        answers.insert(p.to_string(), Answer::Boolean(true));
    }
    ResponseSet {
        id: Uuid::new_v4(),
        instrument_id: "nccn-dt".into(),
        instrument_version: 1,
        subject_id: subject.into(),
        answers,
        completed_at: at,
        entry_mode: EntryMode::Standard,
        attachment: None,
    }
}

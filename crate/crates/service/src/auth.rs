//! Accounts, salted credential hashes and bearer tokens.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Patient,
    Caregiver,
    Provider,
    Other,
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "patient" => Ok(Role::Patient),
            "caregiver" => Ok(Role::Caregiver),
            "provider" => Ok(Role::Provider),
            "other" => Ok(Role::Other),
            _ => Err(format!("unknown role {s:?}")),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Patient => "patient",
            Role::Caregiver => "caregiver",
            Role::Provider => "provider",
            Role::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAccount {
    pub user_id: String,
    pub role: Role,
    /// Subjects this account may read. A patient is linked to itself only.
    pub linked_subjects: BTreeSet<String>,
    pub enrolled_at: DateTime<Utc>,
}

impl UserAccount {
    pub fn new(user_id: &str, role: Role, linked: impl IntoIterator<Item = String>, at: DateTime<Utc>) -> Self {
        let linked_subjects = match role {
            Role::Patient => BTreeSet::from([user_id.to_string()]),
            _ => linked.into_iter().collect(),
        };
        Self {
            user_id: user_id.to_string(),
            role,
            linked_subjects,
            enrolled_at: at,
        }
    }

    pub fn may_read(&self, subject_id: &str) -> bool {
        self.linked_subjects.contains(subject_id)
    }

    /// Only the subject may write its own records.
    pub fn may_write(&self, subject_id: &str) -> bool {
        self.role == Role::Patient && self.user_id == subject_id
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Credential {
    pub salt: String,
    /// Hex sha256 of salt bytes followed by password bytes.
    pub hash: String,
}

fn digest(salt: &str, password: &str) -> String {
    let mut h = Sha256::new();
    h.update(salt.as_bytes());
    h.update(password.as_bytes());
    hex::encode(h.finalize())
}

fn random_hex(bytes: usize) -> String {
    let mut buf = vec![0u8; bytes];
    rand::rng().fill_bytes(&mut buf);
    hex::encode(buf)
}

impl Credential {
    pub fn create(password: &str) -> Self {
        Self::with_salt(&random_hex(16), password)
    }

    pub fn with_salt(salt: &str, password: &str) -> Self {
        Self {
            salt: salt.to_string(),
            hash: digest(salt, password),
        }
    }

    pub fn verify(&self, password: &str) -> bool {
        let candidate = digest(&self.salt, password);
        // Fixed-time comparison over equal-length hex strings.
        candidate.len() == self.hash.len()
            && candidate
                .bytes()
                .zip(self.hash.bytes())
                .fold(0u8, |acc, (a, b)| acc | (a ^ b))
                == 0
    }
}

pub fn new_token() -> String {
    random_hex(32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        // sha256("saltpw")
        let c = Credential::with_salt("salt", "pw");
        assert_eq!(c.hash, "21baed949b716c49cbf7d8fe79412f1dc104745650a32081ae0be0b967aeb7f3");
        assert!(c.verify("pw"));
        assert!(!c.verify("pw "));
    }

    #[test]
    fn salts_differ() {
        let a = Credential::create("same");
        let b = Credential::create("same");
        assert_ne!(a.salt, b.salt);
        assert_ne!(a.hash, b.hash);
        assert!(a.verify("same") && b.verify("same"));
    }

    #[test]
    fn patient_linked_to_self_only() {
        let at = DateTime::UNIX_EPOCH;
        let p = UserAccount::new("p1", Role::Patient, ["p2".to_string()], at);
        assert!(p.may_read("p1") && !p.may_read("p2"));
        assert!(p.may_write("p1"));
        let c = UserAccount::new("c1", Role::Caregiver, ["p1".to_string()], at);
        assert!(c.may_read("p1") && !c.may_write("p1"));
    }
}

//! Audit trail: one entry per API call, gap-free and never rewritten.

use chrono::{DateTime, Utc};
use rpm_core::TimeRange;
use serde::{Deserialize, Serialize};

use crate::journal::{Journal, StorageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditAction {
    Read,
    Write,
    ConsentChange,
    Login,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Allowed,
    Denied,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    /// User id, or empty when the caller could not be identified.
    pub actor: String,
    pub action: AuditAction,
    pub target: String,
    pub outcome: Outcome,
    /// Error code when the call failed for a reason other than access.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

pub struct AuditLog {
    entries: Vec<AuditEntry>,
    journal: Journal<AuditEntry>,
}

impl AuditLog {
    pub fn in_memory() -> Self {
        Self {
            entries: Vec::new(),
            journal: Journal::in_memory(),
        }
    }

    pub fn open(path: &std::path::Path) -> Result<Self, StorageError> {
        let (journal, entries) = Journal::<AuditEntry>::open(path)?;
        for (i, e) in entries.iter().enumerate() {
            if e.seq != i as u64 + 1 {
                return Err(StorageError::Corrupt {
                    path: path.to_path_buf(),
                    line: i + 1,
                    reason: format!("audit seq {} out of order", e.seq),
                });
            }
        }
        Ok(Self { entries, journal })
    }

    pub fn record(
        &mut self,
        at: DateTime<Utc>,
        actor: &str,
        action: AuditAction,
        target: &str,
        outcome: Outcome,
        detail: Option<String>,
    ) -> Result<u64, StorageError> {
        let entry = AuditEntry {
            seq: self.entries.len() as u64 + 1,
            at,
            actor: actor.to_string(),
            action,
            target: target.to_string(),
            outcome,
            detail,
        };
        self.journal.append(&entry)?;
        self.entries.push(entry);
        Ok(self.entries.len() as u64)
    }

    pub fn entries(&self) -> &[AuditEntry] {
        &self.entries
    }

    pub fn in_range(&self, range: TimeRange) -> Vec<AuditEntry> {
        self.entries.iter().filter(|e| range.contains(e.at)).cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

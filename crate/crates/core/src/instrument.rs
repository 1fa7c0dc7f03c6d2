//! Survey instruments: definitions, response validation and scoring.
//!
//! An [`Instrument`] is loaded from a JSON definition document. Each
//! [`Section`] is one survey within the instrument (one card in the
//! card-based navigation mode). Two instruments ship with the crate: the
//! distress thermometer with its problem list, and the ten-item system
//! usability scale.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

/// Flag threshold used when a deployment does not configure one.
pub const DEFAULT_DISTRESS_THRESHOLD: i64 = 4;

const DT_DEFINITION: &str = include_str!("../fixtures/dt.json");
const SUS_DEFINITION: &str = include_str!("../fixtures/sus.json");

#[derive(Debug, Error)]
pub enum InstrumentError {
    #[error("malformed instrument document: {0}")]
    Parse(String),
    #[error("schema violation at {path}: {reason}")]
    Schema { path: String, reason: String },
}

impl InstrumentError {
    fn schema(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Schema {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItemKind {
    Scale { min: i64, max: i64 },
    Boolean,
    FreeText,
}

impl ItemKind {
    fn name(&self) -> &'static str {
        match self {
            ItemKind::Scale { .. } => "scale",
            ItemKind::Boolean => "boolean",
            ItemKind::FreeText => "free_text",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub kind: ItemKind,
    pub label: String,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub id: String,
    pub title: String,
    pub items: Vec<Item>,
}

/// A validated survey instrument. Construct through [`load_instrument`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstrumentDocument", into = "InstrumentDocument")]
pub struct Instrument {
    pub id: String,
    pub version: u32,
    pub title: String,
    pub sections: Vec<Section>,
}

impl Instrument {
    /// The built-in distress thermometer and problem list.
    pub fn distress_thermometer() -> Instrument {
        load_instrument(DT_DEFINITION).expect("bundled dt.json is valid")
    }

    /// The built-in system usability scale.
    pub fn system_usability_scale() -> Instrument {
        load_instrument(SUS_DEFINITION).expect("bundled sus.json is valid")
    }

    pub fn items(&self) -> impl Iterator<Item = (&Section, &Item)> {
        self.sections
            .iter()
            .flat_map(|s| s.items.iter().map(move |i| (s, i)))
    }

    pub fn item(&self, item_id: &str) -> Option<&Item> {
        self.items().map(|(_, i)| i).find(|i| i.id == item_id)
    }

    /// The first scale item, read as the thermometer when scoring distress.
    pub fn thermometer_item(&self) -> Option<&Item> {
        self.items()
            .map(|(_, i)| i)
            .find(|i| matches!(i.kind, ItemKind::Scale { .. }))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instrument serializes")
    }
}

/// Parses and validates an instrument definition document.
pub fn load_instrument(document: &str) -> Result<Instrument, InstrumentError> {
    if document.trim().is_empty() {
        return Err(InstrumentError::Parse("empty document".into()));
    }
    let doc: InstrumentDocument =
        serde_json::from_str(document).map_err(|e| InstrumentError::Parse(e.to_string()))?;
    Instrument::try_from(doc)
}

// On-disk shape: {id, version, title, sections:[{id, title, items:[{id, kind, min, max, label, required}]}]}
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstrumentDocument {
    id: String,
    version: u32,
    title: String,
    sections: Vec<SectionDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SectionDocument {
    id: String,
    title: String,
    items: Vec<ItemDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemDocument {
    id: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<i64>,
    label: String,
    #[serde(default)]
    required: bool,
}

impl TryFrom<InstrumentDocument> for Instrument {
    type Error = InstrumentError;

    fn try_from(doc: InstrumentDocument) -> Result<Self, Self::Error> {
        if doc.id.trim().is_empty() {
            return Err(InstrumentError::schema("id", "must not be empty"));
        }
        if doc.sections.is_empty() {
            return Err(InstrumentError::schema("sections", "at least one section required"));
        }
        let mut section_ids = HashSet::new();
        // Answers are keyed by item id, so item ids must be unique across the whole instrument.
        let mut item_ids = HashSet::new();
        let mut sections = Vec::with_capacity(doc.sections.len());
        for (si, section) in doc.sections.into_iter().enumerate() {
            let spath = format!("sections[{si}]");
            if section.id.trim().is_empty() {
                return Err(InstrumentError::schema(format!("{spath}.id"), "must not be empty"));
            }
            if !section_ids.insert(section.id.clone()) {
                return Err(InstrumentError::schema(
                    format!("{spath}.id"),
                    format!("duplicate section id {:?}", section.id),
                ));
            }
            if section.title.trim().is_empty() {
                return Err(InstrumentError::schema(format!("{spath}.title"), "must not be empty"));
            }
            if section.items.is_empty() {
                return Err(InstrumentError::schema(
                    format!("{spath}.items"),
                    "at least one item required",
                ));
            }
            let mut items = Vec::with_capacity(section.items.len());
            for (ii, item) in section.items.into_iter().enumerate() {
                let ipath = format!("{spath}.items[{ii}]");
                if item.id.trim().is_empty() {
                    return Err(InstrumentError::schema(format!("{ipath}.id"), "must not be empty"));
                }
                if !item_ids.insert(item.id.clone()) {
                    return Err(InstrumentError::schema(
                        format!("{ipath}.id"),
                        format!("duplicate item id {:?}", item.id),
                    ));
                }
                let kind = match item.kind.as_str() {
                    "scale" => {
                        let (Some(min), Some(max)) = (item.min, item.max) else {
                            return Err(InstrumentError::schema(
                                ipath,
                                "scale items need integer min and max",
                            ));
                        };
                        if min >= max {
                            return Err(InstrumentError::schema(
                                format!("{ipath}.min"),
                                format!("min {min} must be below max {max}"),
                            ));
                        }
                        ItemKind::Scale { min, max }
                    }
                    "boolean" | "free_text" => {
                        if item.min.is_some() || item.max.is_some() {
                            return Err(InstrumentError::schema(
                                ipath,
                                "min/max only apply to scale items",
                            ));
                        }
                        if item.kind == "boolean" {
                            ItemKind::Boolean
                        } else {
                            ItemKind::FreeText
                        }
                    }
                    other => {
                        return Err(InstrumentError::schema(
                            format!("{ipath}.kind"),
                            format!("unknown item kind {other:?}"),
                        ))
                    }
                };
                items.push(Item {
                    id: item.id,
                    kind,
                    label: item.label,
                    required: item.required,
                });
            }
            sections.push(Section {
                id: section.id,
                title: section.title,
                items,
            });
        }
        Ok(Instrument {
            id: doc.id,
            version: doc.version,
            title: doc.title,
            sections,
        })
    }
}

impl From<Instrument> for InstrumentDocument {
    fn from(inst: Instrument) -> Self {
        InstrumentDocument {
            id: inst.id,
            version: inst.version,
            title: inst.title,
            sections: inst
                .sections
                .into_iter()
                .map(|s| SectionDocument {
                    id: s.id,
                    title: s.title,
                    items: s
                        .items
                        .into_iter()
                        .map(|i| {
                            let (min, max) = match i.kind {
                                ItemKind::Scale { min, max } => (Some(min), Some(max)),
                                _ => (None, None),
                            };
                            ItemDocument {
                                id: i.id,
                                kind: i.kind.name().to_string(),
                                min,
                                max,
                                label: i.label,
                                required: i.required,
                            }
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// How the patient navigated the instrument when completing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryMode {
    Advanced,
    Standard,
    Checklist,
    Paper,
}

impl EntryMode {
    pub const ALL: [EntryMode; 4] = [
        EntryMode::Advanced,
        EntryMode::Standard,
        EntryMode::Checklist,
        EntryMode::Paper,
    ];

    pub fn is_scorable(self) -> bool {
        self != EntryMode::Paper
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Answer {
    Boolean(bool),
    Scale(i64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseSet {
    pub id: Uuid,
    pub instrument_id: String,
    pub instrument_version: u32,
    pub subject_id: String,
    #[serde(default)]
    pub answers: BTreeMap<String, Answer>,
    pub completed_at: DateTime<Utc>,
    pub entry_mode: EntryMode,
    /// Reference to an uploaded photo of a completed paper form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attachment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ViolationReason {
    MissingRequiredItem,
    OutOfRange { value: i64, min: i64, max: i64 },
    KindMismatch { expected: String },
    UnknownItem,
    MissingAttachment,
}

impl fmt::Display for ViolationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationReason::MissingRequiredItem => f.write_str("missing required item"),
            ViolationReason::OutOfRange { value, min, max } => {
                write!(f, "out of range: {value} not in [{min}, {max}]")
            }
            ViolationReason::KindMismatch { expected } => {
                write!(f, "answer does not match item kind {expected}")
            }
            ViolationReason::UnknownItem => f.write_str("unknown item"),
            ViolationReason::MissingAttachment => f.write_str("paper entry requires an attachment"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Item id, or `attachment` for the paper-mode photo.
    pub field: String,
    #[serde(flatten)]
    pub reason: ViolationReason,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("response targets instrument {found:?}, expected {expected:?}")]
    InstrumentMismatch { expected: String, found: String },
    #[error("response pins version {found}, instrument is version {expected}")]
    VersionMismatch { expected: u32, found: u32 },
}

/// Checks a response against its instrument. Pure; the same inputs always
/// produce the same verdict.
pub fn validate_response(
    instrument: &Instrument,
    response: &ResponseSet,
) -> Result<Verdict, ValidationError> {
    if response.instrument_id != instrument.id {
        return Err(ValidationError::InstrumentMismatch {
            expected: instrument.id.clone(),
            found: response.instrument_id.clone(),
        });
    }
    if response.instrument_version != instrument.version {
        return Err(ValidationError::VersionMismatch {
            expected: instrument.version,
            found: response.instrument_version,
        });
    }

    let mut violations = Vec::new();
    let paper = response.entry_mode == EntryMode::Paper;
    if paper && response.attachment.is_none() {
        violations.push(Violation {
            field: "attachment".into(),
            reason: ViolationReason::MissingAttachment,
        });
    }

    for (_, item) in instrument.items() {
        match response.answers.get(&item.id) {
            None if item.required && !paper => violations.push(Violation {
                field: item.id.clone(),
                reason: ViolationReason::MissingRequiredItem,
            }),
            None => {}
            Some(answer) => {
                if let Some(reason) = check_answer(item.kind, answer) {
                    violations.push(Violation {
                        field: item.id.clone(),
                        reason,
                    });
                }
            }
        }
    }
    for item_id in response.answers.keys() {
        if instrument.item(item_id).is_none() {
            violations.push(Violation {
                field: item_id.clone(),
                reason: ViolationReason::UnknownItem,
            });
        }
    }
    Ok(Verdict { violations })
}

fn check_answer(kind: ItemKind, answer: &Answer) -> Option<ViolationReason> {
    match (kind, answer) {
        (ItemKind::Scale { min, max }, Answer::Scale(v)) => {
            (*v < min || *v > max).then_some(ViolationReason::OutOfRange { value: *v, min, max })
        }
        (ItemKind::Boolean, Answer::Boolean(_)) | (ItemKind::FreeText, Answer::Text(_)) => None,
        (kind, _) => Some(ViolationReason::KindMismatch {
            expected: kind.name().to_string(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistressSummary {
    pub thermometer_score: i64,
    pub flagged: bool,
    pub problem_counts: BTreeMap<String, u32>,
    pub total_problems: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("response is not scorable: {0}")]
    NotScorable(String),
    #[error(transparent)]
    Mismatch(#[from] ValidationError),
    #[error("response failed validation ({} violations)", .0.len())]
    Invalid(Vec<Violation>),
}

/// Reads the thermometer score and counts checked problems per section.
///
/// Paper-mode responses carry only a photo and are never scored.
pub fn compute_distress_summary(
    instrument: &Instrument,
    response: &ResponseSet,
    threshold: i64,
) -> Result<DistressSummary, ScoreError> {
    if !response.entry_mode.is_scorable() {
        return Err(ScoreError::NotScorable("paper entries are image only".into()));
    }
    let verdict = validate_response(instrument, response)?;
    if !verdict.is_ok() {
        return Err(ScoreError::Invalid(verdict.violations));
    }
    let thermometer = instrument
        .thermometer_item()
        .ok_or_else(|| ScoreError::NotScorable("instrument has no scale item".into()))?;
    let thermometer_score = match response.answers.get(&thermometer.id) {
        Some(Answer::Scale(v)) => *v,
        _ => return Err(ScoreError::NotScorable("thermometer unanswered".into())),
    };

    let mut problem_counts = BTreeMap::new();
    for section in &instrument.sections {
        let booleans = section
            .items
            .iter()
            .filter(|i| i.kind == ItemKind::Boolean);
        let mut any = false;
        let mut count = 0u32;
        for item in booleans {
            any = true;
            if response.answers.get(&item.id) == Some(&Answer::Boolean(true)) {
                count += 1;
            }
        }
        if any {
            problem_counts.insert(section.id.clone(), count);
        }
    }
    let total_problems = problem_counts.values().sum();
    Ok(DistressSummary {
        thermometer_score,
        flagged: thermometer_score >= threshold,
        problem_counts,
        total_problems,
    })
}

pub const SUS_ITEM_COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SusError {
    #[error("questionnaire has {0} items, expected 10")]
    InvalidLength(usize),
    #[error("item {position} has value {value}, expected 1-5")]
    OutOfRange { position: usize, value: i64 },
}

/// Ten usability ratings on a 1–5 agreement scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SusDocument", into = "SusDocument")]
pub struct SusResponse {
    items: [u8; SUS_ITEM_COUNT],
}

#[derive(Serialize, Deserialize)]
struct SusDocument {
    items: Vec<i64>,
}

impl SusResponse {
    pub fn new(values: &[i64]) -> Result<Self, SusError> {
        if values.len() != SUS_ITEM_COUNT {
            return Err(SusError::InvalidLength(values.len()));
        }
        let mut items = [0u8; SUS_ITEM_COUNT];
        for (i, &v) in values.iter().enumerate() {
            if !(1..=5).contains(&v) {
                return Err(SusError::OutOfRange {
                    position: i + 1,
                    value: v,
                });
            }
            items[i] = v as u8;
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[u8; SUS_ITEM_COUNT] {
        &self.items
    }
}

impl TryFrom<SusDocument> for SusResponse {
    type Error = SusError;
    fn try_from(doc: SusDocument) -> Result<Self, Self::Error> {
        SusResponse::new(&doc.items)
    }
}

impl From<SusResponse> for SusDocument {
    fn from(r: SusResponse) -> Self {
        SusDocument {
            items: r.items.iter().map(|&v| v as i64).collect(),
        }
    }
}

/// Standard SUS score in [0, 100]: positively worded (odd) items contribute
/// `value - 1`, negatively worded (even) items `5 - value`, and the sum is
/// scaled by 2.5.
pub fn score_sus(response: &SusResponse) -> f64 {
    let raw: u32 = response
        .items
        .iter()
        .enumerate()
        .map(|(idx, &v)| {
            let v = u32::from(v);
            if idx % 2 == 0 {
                v - 1
            } else {
                5 - v
            }
        })
        .sum();
    f64::from(raw) * 2.5
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dt_response(answers: &[(&str, Answer)], mode: EntryMode) -> ResponseSet {
        let dt = Instrument::distress_thermometer();
        ResponseSet {
            id: Uuid::nil(),
            instrument_id: dt.id.clone(),
            instrument_version: dt.version,
            subject_id: "patient-1".into(),
            answers: answers
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            completed_at: DateTime::UNIX_EPOCH,
            entry_mode: mode,
            attachment: None,
        }
    }

    #[test]
    fn builtin_dt_shape() {
        let dt = Instrument::distress_thermometer();
        assert_eq!(dt.sections[0].id, "thermometer");
        assert_eq!(dt.sections[0].items.len(), 1);
        assert_eq!(
            dt.thermometer_item().unwrap().kind,
            ItemKind::Scale { min: 0, max: 10 }
        );
        let ids: Vec<_> = dt.sections.iter().map(|s| s.id.as_str()).collect();
        for expected in ["practical", "family", "emotional", "spiritual", "physical"] {
            assert!(ids.contains(&expected), "missing section {expected}");
        }
        let free_text = dt
            .items()
            .filter(|(_, i)| i.kind == ItemKind::FreeText)
            .count();
        assert_eq!(free_text, 1);
    }

    #[test]
    fn empty_document_is_parse_error() {
        assert!(matches!(load_instrument(""), Err(InstrumentError::Parse(_))));
        assert!(matches!(load_instrument("  \n"), Err(InstrumentError::Parse(_))));
        assert!(matches!(load_instrument("{"), Err(InstrumentError::Parse(_))));
    }

    #[test]
    fn duplicate_item_ids_are_schema_errors() {
        let doc = r#"{"id":"x","version":1,"title":"X","sections":[
            {"id":"s","title":"S","items":[
                {"id":"a","kind":"boolean","label":"A","required":false},
                {"id":"a","kind":"boolean","label":"A again","required":false}]}]}"#;
        match load_instrument(doc) {
            Err(InstrumentError::Schema { path, .. }) => assert_eq!(path, "sections[0].items[1].id"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn schema_rejects_bad_shapes() {
        let cases = [
            (r#"{"id":"x","version":1,"title":"X","sections":[]}"#, "sections"),
            (
                r#"{"id":"x","version":1,"title":"X","sections":[{"id":"s","title":"S","items":[]}]}"#,
                "sections[0].items",
            ),
            (
                r#"{"id":"x","version":1,"title":"X","sections":[{"id":"s","title":"S","items":[{"id":"a","kind":"scale","min":5,"max":5,"label":"A"}]}]}"#,
                "sections[0].items[0].min",
            ),
            (
                r#"{"id":"x","version":1,"title":"X","sections":[{"id":"s","title":"S","items":[{"id":"a","kind":"slider","label":"A"}]}]}"#,
                "sections[0].items[0].kind",
            ),
            (
                r#"{"id":"x","version":1,"title":"X","sections":[{"id":"s","title":"","items":[{"id":"a","kind":"boolean","label":"A"}]}]}"#,
                "sections[0].title",
            ),
        ];
        for (doc, want) in cases {
            match load_instrument(doc) {
                Err(InstrumentError::Schema { path, .. }) => assert_eq!(path, want, "{doc}"),
                other => panic!("{doc}: expected schema error, got {other:?}"),
            }
        }
    }

    #[test]
    fn thermometer_out_of_range() {
        let dt = Instrument::distress_thermometer();
        let r = dt_response(&[("distress", Answer::Scale(11))], EntryMode::Standard);
        let v = validate_response(&dt, &r).unwrap();
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].field, "distress");
        assert!(v.violations[0].to_string().contains("out of range"));
    }

    #[test]
    fn missing_required_thermometer() {
        let dt = Instrument::distress_thermometer();
        let r = dt_response(&[], EntryMode::Standard);
        let v = validate_response(&dt, &r).unwrap();
        assert_eq!(
            v.violations,
            vec![Violation {
                field: "distress".into(),
                reason: ViolationReason::MissingRequiredItem
            }]
        );
        assert_eq!(v.violations[0].reason.to_string(), "missing required item");
    }

    #[test]
    fn paper_mode_needs_only_attachment() {
        let dt = Instrument::distress_thermometer();
        let mut r = dt_response(&[], EntryMode::Paper);
        r.attachment = Some("blob:photo-1".into());
        assert!(validate_response(&dt, &r).unwrap().is_ok());

        r.attachment = None;
        let v = validate_response(&dt, &r).unwrap();
        assert_eq!(v.violations[0].reason, ViolationReason::MissingAttachment);
    }

    #[test]
    fn version_mismatch() {
        let dt = Instrument::distress_thermometer();
        let mut r = dt_response(&[("distress", Answer::Scale(1))], EntryMode::Standard);
        r.instrument_version += 1;
        assert!(matches!(
            validate_response(&dt, &r),
            Err(ValidationError::VersionMismatch { .. })
        ));
    }

    #[test]
    fn kind_mismatch_and_unknown_item() {
        let dt = Instrument::distress_thermometer();
        let r = dt_response(
            &[
                ("distress", Answer::Boolean(true)),
                ("no_such_item", Answer::Boolean(true)),
            ],
            EntryMode::Advanced,
        );
        let v = validate_response(&dt, &r).unwrap();
        let reasons: Vec<_> = v.violations.iter().map(|v| &v.reason).collect();
        assert!(matches!(reasons[0], ViolationReason::KindMismatch { .. }));
        assert_eq!(reasons[1], &ViolationReason::UnknownItem);
    }

    #[test]
    fn summary_counts_and_flag() {
        let dt = Instrument::distress_thermometer();
        let r = dt_response(
            &[
                ("distress", Answer::Scale(7)),
                ("housing", Answer::Boolean(true)),
                ("transportation", Answer::Boolean(true)),
                ("worry", Answer::Boolean(true)),
                ("insurance", Answer::Boolean(false)),
            ],
            EntryMode::Standard,
        );
        let s = compute_distress_summary(&dt, &r, 4).unwrap();
        assert!(s.flagged);
        assert_eq!(s.total_problems, 3);
        assert_eq!(s.problem_counts["practical"], 2);
        assert_eq!(s.problem_counts["emotional"], 1);
        assert_eq!(s.problem_counts["family"], 0);
    }

    #[test]
    fn summary_zero_and_boundary() {
        let dt = Instrument::distress_thermometer();
        let r = dt_response(&[("distress", Answer::Scale(0))], EntryMode::Checklist);
        let s = compute_distress_summary(&dt, &r, DEFAULT_DISTRESS_THRESHOLD).unwrap();
        assert!(!s.flagged);
        assert_eq!(s.total_problems, 0);

        let r = dt_response(&[("distress", Answer::Scale(4))], EntryMode::Checklist);
        assert!(compute_distress_summary(&dt, &r, 4).unwrap().flagged);
        let r = dt_response(&[("distress", Answer::Scale(3))], EntryMode::Checklist);
        assert!(!compute_distress_summary(&dt, &r, 4).unwrap().flagged);
    }

    #[test]
    fn paper_mode_not_scorable() {
        let dt = Instrument::distress_thermometer();
        let mut r = dt_response(&[], EntryMode::Paper);
        r.attachment = Some("blob:1".into());
        assert!(matches!(
            compute_distress_summary(&dt, &r, 4),
            Err(ScoreError::NotScorable(_))
        ));
    }

    #[test]
    fn sus_fixed_points() {
        let all3 = SusResponse::new(&[3; 10]).unwrap();
        assert_eq!(score_sus(&all3), 50.0);
        let best = SusResponse::new(&[5, 1, 5, 1, 5, 1, 5, 1, 5, 1]).unwrap();
        assert_eq!(score_sus(&best), 100.0);
        let worst = SusResponse::new(&[1, 5, 1, 5, 1, 5, 1, 5, 1, 5]).unwrap();
        assert_eq!(score_sus(&worst), 0.0);
    }

    #[test]
    fn sus_errors() {
        assert_eq!(SusResponse::new(&[3; 9]), Err(SusError::InvalidLength(9)));
        assert_eq!(
            SusResponse::new(&[3, 3, 3, 6, 3, 3, 3, 3, 3, 3]),
            Err(SusError::OutOfRange {
                position: 4,
                value: 6
            })
        );
        assert!(serde_json::from_str::<SusResponse>(r#"{"items":[0,3,3,3,3,3,3,3,3,3]}"#).is_err());
    }

    #[test]
    fn answers_deserialize_by_shape() {
        let a: BTreeMap<String, Answer> =
            serde_json::from_str(r#"{"a":true,"b":7,"c":"text"}"#).unwrap();
        assert_eq!(a["a"], Answer::Boolean(true));
        assert_eq!(a["b"], Answer::Scale(7));
        assert_eq!(a["c"], Answer::Text("text".into()));
    }
}

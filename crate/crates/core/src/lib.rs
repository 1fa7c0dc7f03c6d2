//! Patient-side domain logic for remote distress monitoring: survey
//! instruments and scoring, screening cadence, and consent-gated sensor
//! observations.

pub mod ingest;
pub mod instrument;
pub mod scheduler;

pub use ingest::{
    ConsentDecision, ConsentSettings, IngestError, Observation, ObservationStore, TimeRange,
};
pub use instrument::{
    compute_distress_summary, load_instrument, score_sus, validate_response, Answer,
    DistressSummary, EntryMode, Instrument, InstrumentError, ResponseSet, ScoreError, SusError,
    SusResponse, Verdict, Violation, ViolationReason,
};
pub use scheduler::{
    adherence, next_due, status, AdherenceRecord, CadencePolicy, ScheduleError, ScreeningState,
    ScreeningStatus,
};

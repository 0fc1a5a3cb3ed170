//! The interactive search protocol: modality modes, three-stage queries
//! chained through selections, the time budget, scoring, and the event log.

mod clock;
mod error;
mod log;
mod record;
mod replay;
mod state;

pub use clock::{Clock, ManualClock, SystemClock};
pub use error::SessionError;
pub use log::{event_line, header_line, parse_log, render_log, SessionEvent, SessionHeader, LOG_FORMAT};
pub use record::{
    ColorSet, DescriptorEdit, LevelDelta, Modality, Mode, Outcome, Phase, QueryPayload, QueryRecord,
    SessionState,
};
pub use replay::{replay_log, ReplayReport};
pub use state::{Session, SessionConfig, SESSION_BUDGET_MS};

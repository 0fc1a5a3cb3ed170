use thiserror::Error;

use super::record::{Modality, Mode, SessionState};
use crate::dataset::ChairId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("{modality:?} queries are not allowed in {mode:?} sessions")]
    ModeViolation { mode: Mode, modality: Modality },

    #[error("a query is awaiting selection")]
    QueryInFlight,

    #[error("no query is awaiting selection")]
    NoPendingSelection,

    #[error("rank {rank} out of range for {len} results")]
    RankOutOfRange { rank: usize, len: usize },

    #[error("the session budget is exhausted")]
    TimedOut,

    #[error("the session is {0:?}")]
    NotActive(SessionState),

    #[error("unknown chair {0}")]
    UnknownChair(ChairId),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl SessionError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::ModeViolation { .. } => "MODE_VIOLATION",
            SessionError::QueryInFlight => "QUERY_IN_FLIGHT",
            SessionError::NoPendingSelection => "NO_PENDING_SELECTION",
            SessionError::RankOutOfRange { .. } => "RANK_OUT_OF_RANGE",
            SessionError::TimedOut => "SESSION_TIMED_OUT",
            SessionError::NotActive(_) => "SESSION_NOT_ACTIVE",
            SessionError::UnknownChair(_) => "UNKNOWN_CHAIR",
            SessionError::Invalid(_) => "INVALID_INPUT",
        }
    }
}

impl From<crate::Error> for SessionError {
    fn from(e: crate::Error) -> Self {
        SessionError::Invalid(e.to_string())
    }
}

//! Line-delimited session logs: one header line, then one JSON object per event.

use serde::{Deserialize, Serialize};

use super::record::{DescriptorEdit, Modality, Mode, Outcome, QueryPayload, SessionState};
use crate::dataset::ChairId;
use crate::index::ResultSet;
use crate::query::AttributeVector;

pub const LOG_FORMAT: &str = "chairsearch-session-log/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub format: String,
    pub session_id: String,
    pub mode: Mode,
    pub target: ChairId,
    pub n_gram: usize,
    pub budget_ms: u64,
    pub start_ms: u64,
    pub manifest_checksum: String,
    pub dictionary_checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    QuerySubmitted {
        t_ms: u64,
        query_id: u32,
        modality: Modality,
        payload: QueryPayload,
        payload_digest: String,
    },
    QueryProcessed {
        t_ms: u64,
        query_id: u32,
        results: ResultSet,
        /// Voice state after interpretation.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        descriptor: Option<AttributeVector>,
        /// Digest of the pooled visual descriptor for sketch queries.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        visual_digest: Option<String>,
    },
    QuerySelected {
        t_ms: u64,
        query_id: u32,
        rank: usize,
        chair_id: ChairId,
    },
    /// A submission refused on arrival (with its payload) or an in-flight
    /// query cut off by the session ending (without).
    QueryRejected {
        t_ms: u64,
        query_id: u32,
        code: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        payload: Option<QueryPayload>,
    },
    DescriptorEdited {
        t_ms: u64,
        edit: DescriptorEdit,
        descriptor: AttributeVector,
    },
    SessionEnded {
        t_ms: u64,
        state: SessionState,
        outcome: Outcome,
    },
}

impl SessionEvent {
    pub fn t_ms(&self) -> u64 {
        match self {
            SessionEvent::QuerySubmitted { t_ms, .. }
            | SessionEvent::QueryProcessed { t_ms, .. }
            | SessionEvent::QuerySelected { t_ms, .. }
            | SessionEvent::QueryRejected { t_ms, .. }
            | SessionEvent::DescriptorEdited { t_ms, .. }
            | SessionEvent::SessionEnded { t_ms, .. } => *t_ms,
        }
    }
}

pub fn header_line(header: &SessionHeader) -> String {
    serde_json::to_string(header).expect("serializable")
}

pub fn event_line(event: &SessionEvent) -> String {
    serde_json::to_string(event).expect("serializable")
}

/// Whole log as text, newline-terminated lines.
pub fn render_log(header: &SessionHeader, events: &[SessionEvent]) -> String {
    let mut out = header_line(header);
    out.push('\n');
    for e in events {
        out.push_str(&event_line(e));
        out.push('\n');
    }
    out
}

pub fn parse_log(text: &str) -> crate::Result<(SessionHeader, Vec<SessionEvent>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines
        .next()
        .ok_or_else(|| crate::Error::Format("empty session log".into()))?;
    let header: SessionHeader = serde_json::from_str(first)?;
    if header.format != LOG_FORMAT {
        return Err(crate::Error::VersionMismatch {
            expected: LOG_FORMAT.into(),
            found: header.format,
        });
    }
    let events = lines
        .map(|l| serde_json::from_str(l).map_err(crate::Error::from))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok((header, events))
}

//! Re-running a session log through the engine.

use std::sync::Arc;

use super::clock::ManualClock;
use super::log::{parse_log, SessionEvent};
use super::record::{Outcome, QueryPayload, SessionState};
use super::state::{Session, SessionConfig};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::index::ResultSet;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    /// Outcome of the replayed session.
    pub outcome: Outcome,
    /// Outcome stored in the log's end event, if the session ended.
    pub recorded_outcome: Option<Outcome>,
    pub queries_replayed: usize,
    /// Human-readable description of every divergence; empty on a faithful replay.
    pub mismatches: Vec<String>,
}

impl ReplayReport {
    pub fn is_faithful(&self) -> bool {
        self.mismatches.is_empty() && self.recorded_outcome.as_ref().is_none_or(|o| *o == self.outcome)
    }
}

/// Replays `text` (a full log) with a manual clock set to each event's time
/// and compares results, selections and the outcome with the record.
pub fn replay_log(engine: Arc<Engine>, text: &str) -> Result<ReplayReport> {
    let (header, events) = parse_log(text)?;
    if header.dictionary_checksum != engine.dictionary().checksum {
        return Err(Error::ChecksumMismatch {
            what: "dictionary",
            expected: header.dictionary_checksum,
            found: engine.dictionary().checksum.clone(),
        });
    }
    if header.manifest_checksum != engine.manifest_checksum() {
        return Err(Error::ChecksumMismatch {
            what: "manifest",
            expected: header.manifest_checksum,
            found: engine.manifest_checksum().into(),
        });
    }
    let clock = Arc::new(ManualClock::new(header.start_ms));
    let config = SessionConfig {
        n_gram: header.n_gram,
        budget_ms: header.budget_ms,
    };
    let mut session = Session::begin(engine, clock.clone(), header.session_id, header.target, header.mode, config)
        .map_err(|e| Error::invalid(e.to_string()))?;

    let mut mismatches = Vec::new();
    let mut last: Option<(u32, std::result::Result<ResultSet, String>)> = None;
    let mut recorded_outcome = None;
    let mut queries = 0;
    let mut end_t = header.start_ms;
    let submit = |session: &mut Session, payload: &QueryPayload| match payload {
        QueryPayload::Voice { text } => session.submit_voice(text),
        QueryPayload::Sketch { sketch, include_model } => session.submit_sketch(sketch, *include_model),
    };
    for event in &events {
        clock.set(event.t_ms());
        end_t = event.t_ms();
        match event {
            SessionEvent::QuerySubmitted { query_id, payload, .. } => {
                queries += 1;
                let r = submit(&mut session, payload).map_err(|e| e.code().to_string());
                last = Some((*query_id, r));
            }
            SessionEvent::QueryProcessed { query_id, results, .. } => match &last {
                Some((id, Ok(got))) if id == query_id => {
                    if got != results {
                        mismatches.push(format!("query {query_id}: results differ"));
                    }
                }
                Some((id, Err(code))) if id == query_id => {
                    mismatches.push(format!("query {query_id}: replay rejected with {code}"));
                }
                _ => mismatches.push(format!("query {query_id}: processed without submission")),
            },
            SessionEvent::QueryRejected {
                query_id,
                code,
                payload: Some(payload),
                ..
            } => {
                queries += 1;
                match submit(&mut session, payload) {
                    Err(e) if e.code() == code => {}
                    Err(e) => mismatches.push(format!("query {query_id}: rejected with {} not {code}", e.code())),
                    Ok(_) => mismatches.push(format!("query {query_id}: accepted on replay, recorded {code}")),
                }
            }
            // Produced by the operation that ended the session.
            SessionEvent::QueryRejected { payload: None, .. } => {}
            SessionEvent::QuerySelected {
                query_id,
                rank,
                chair_id,
                ..
            } => match session.select(*rank) {
                Ok(c) if c == *chair_id => {}
                Ok(c) => mismatches.push(format!("query {query_id}: selected {c} not {chair_id}")),
                Err(e) => mismatches.push(format!("query {query_id}: selection failed: {e}")),
            },
            SessionEvent::DescriptorEdited { edit, descriptor, .. } => match session.edit_descriptor(edit.clone()) {
                Ok(d) if d == *descriptor => {}
                Ok(_) => mismatches.push("descriptor edit diverged".into()),
                Err(e) => mismatches.push(format!("descriptor edit failed: {e}")),
            },
            SessionEvent::SessionEnded { state, outcome, .. } => {
                recorded_outcome = Some(outcome.clone());
                match state {
                    SessionState::Abandoned => {
                        if let Err(e) = session.abandon() {
                            mismatches.push(format!("abandon failed: {e}"));
                        }
                    }
                    SessionState::TimedOut => {
                        session.poll();
                    }
                    SessionState::Succeeded | SessionState::Active => {}
                }
                if session.state() != *state {
                    mismatches.push(format!("ended {:?}, recorded {state:?}", session.state()));
                }
            }
        }
    }
    clock.set(end_t);
    let replayed_events = session.events();
    if replayed_events != events.as_slice() {
        let first = replayed_events
            .iter()
            .zip(&events)
            .position(|(a, b)| a != b)
            .unwrap_or(replayed_events.len().min(events.len()));
        mismatches.push(format!("event streams diverge at event {first}"));
    }
    Ok(ReplayReport {
        outcome: session.score(),
        recorded_outcome,
        queries_replayed: queries,
        mismatches,
    })
}

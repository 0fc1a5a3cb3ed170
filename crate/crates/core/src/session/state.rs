//! The per-session state machine.

use std::sync::Arc;

use super::clock::Clock;
use super::error::SessionError;
use super::log::{SessionEvent, SessionHeader, LOG_FORMAT};
use super::record::{
    DescriptorEdit, Modality, Mode, Outcome, Phase, QueryPayload, QueryRecord, SessionState,
};
use crate::dataset::ChairId;
use crate::engine::{Engine, PLACEHOLDER_CHAIR_ID};
use crate::index::{ResultSet, TOP_K};
use crate::query::{apply_utterance, validate_ngram, AttributeVector, DEFAULT_NGRAM};
use crate::sketch::{descriptor, Sketch};

pub const SESSION_BUDGET_MS: u64 = 90_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub n_gram: usize,
    pub budget_ms: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            n_gram: DEFAULT_NGRAM,
            budget_ms: SESSION_BUDGET_MS,
        }
    }
}

type QueryResult = Result<ResultSet, SessionError>;

/// One search for one target chair. Operations must be externally
/// serialized; every mutation is mirrored into the event list.
#[derive(Debug)]
pub struct Session {
    id: String,
    mode: Mode,
    target: ChairId,
    current: ChairId,
    descriptor: AttributeVector,
    config: SessionConfig,
    start_ms: u64,
    end_ms: Option<u64>,
    state: SessionState,
    log: Vec<QueryRecord>,
    events: Vec<SessionEvent>,
    engine: Arc<Engine>,
    clock: Arc<dyn Clock>,
}

impl Session {
    pub fn begin(
        engine: Arc<Engine>,
        clock: Arc<dyn Clock>,
        id: impl Into<String>,
        target: ChairId,
        mode: Mode,
        config: SessionConfig,
    ) -> Result<Session, SessionError> {
        if !engine.contains(target) {
            return Err(SessionError::UnknownChair(target));
        }
        validate_ngram(config.n_gram)?;
        if config.budget_ms == 0 {
            return Err(SessionError::Invalid("budget must be positive".into()));
        }
        let descriptor = engine.attributes(PLACEHOLDER_CHAIR_ID)?;
        Ok(Session {
            id: id.into(),
            mode,
            target,
            current: PLACEHOLDER_CHAIR_ID,
            descriptor,
            config,
            start_ms: clock.now_ms(),
            end_ms: None,
            state: SessionState::Active,
            log: Vec::new(),
            events: Vec::new(),
            engine,
            clock,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn target(&self) -> ChairId {
        self.target
    }

    pub fn current(&self) -> ChairId {
        self.current
    }

    pub fn descriptor(&self) -> &AttributeVector {
        &self.descriptor
    }

    pub fn config(&self) -> SessionConfig {
        self.config
    }

    pub fn start_ms(&self) -> u64 {
        self.start_ms
    }

    pub fn log(&self) -> &[QueryRecord] {
        &self.log
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    pub fn header(&self) -> SessionHeader {
        SessionHeader {
            format: LOG_FORMAT.into(),
            session_id: self.id.clone(),
            mode: self.mode,
            target: self.target,
            n_gram: self.config.n_gram,
            budget_ms: self.config.budget_ms,
            start_ms: self.start_ms,
            manifest_checksum: self.engine.manifest_checksum().into(),
            dictionary_checksum: self.engine.dictionary().checksum.clone(),
        }
    }

    fn over_budget(&self, now: u64) -> bool {
        now.saturating_sub(self.start_ms) > self.config.budget_ms
    }

    /// State as of now, counting an expired budget as a timeout even before
    /// any operation has recorded it. Does not mutate.
    pub fn state(&self) -> SessionState {
        if self.state == SessionState::Active && self.over_budget(self.clock.now_ms()) {
            SessionState::TimedOut
        } else {
            self.state
        }
    }

    pub fn elapsed_ms(&self) -> u64 {
        let now = self.clock.now_ms();
        match self.state() {
            SessionState::TimedOut => self.config.budget_ms,
            SessionState::Active => now.saturating_sub(self.start_ms),
            _ => self.end_ms.unwrap_or(now).saturating_sub(self.start_ms),
        }
    }

    pub fn remaining_ms(&self) -> u64 {
        match self.state() {
            SessionState::Active => self.config.budget_ms.saturating_sub(self.elapsed_ms()),
            _ => 0,
        }
    }

    /// The query awaiting selection, if any.
    pub fn in_flight(&self) -> Option<&QueryRecord> {
        self.log.iter().rev().find(|r| !r.phase.is_terminal())
    }

    fn next_query_id(&self) -> u32 {
        self.log.len() as u32
    }

    fn cut_in_flight(&mut self, now: u64, code: &str) {
        if let Some(rec) = self.log.iter_mut().rev().find(|r| !r.phase.is_terminal()) {
            rec.advance(Phase::Rejected);
            rec.rejection = Some(code.into());
            self.events.push(SessionEvent::QueryRejected {
                t_ms: now,
                query_id: rec.query_id,
                code: code.into(),
                payload: None,
            });
        }
    }

    fn finish(&mut self, now: u64, state: SessionState) {
        self.state = state;
        self.end_ms = Some(match state {
            SessionState::TimedOut => self.start_ms + self.config.budget_ms,
            _ => now,
        });
        let code = match state {
            SessionState::TimedOut => "SESSION_TIMED_OUT",
            _ => "SESSION_NOT_ACTIVE",
        };
        self.cut_in_flight(now, code);
        let outcome = self.score();
        self.events.push(SessionEvent::SessionEnded {
            t_ms: now,
            state,
            outcome,
        });
    }

    /// Fails unless the session is active and within budget; records the
    /// timeout when the budget has just run out.
    fn guard(&mut self, now: u64) -> Result<(), SessionError> {
        if self.state != SessionState::Active {
            return Err(SessionError::NotActive(self.state));
        }
        if self.over_budget(now) {
            self.finish(now, SessionState::TimedOut);
            return Err(SessionError::TimedOut);
        }
        Ok(())
    }

    /// Applies a due timeout. Returns the resulting state.
    pub fn poll(&mut self) -> SessionState {
        let now = self.clock.now_ms();
        if self.state == SessionState::Active && self.over_budget(now) {
            self.finish(now, SessionState::TimedOut);
        }
        self.state
    }

    fn reject(&mut self, now: u64, payload: QueryPayload, err: SessionError) -> SessionError {
        let query_id = self.next_query_id();
        let code = err.code();
        self.log.push(QueryRecord {
            query_id,
            modality: payload.modality(),
            phase: Phase::Rejected,
            payload: payload.clone(),
            model: None,
            results: None,
            selection: None,
            rejection: Some(code.into()),
            started_ms: now,
            processed_ms: None,
            selected_ms: None,
        });
        self.events.push(SessionEvent::QueryRejected {
            t_ms: now,
            query_id,
            code: code.into(),
            payload: Some(payload),
        });
        err
    }

    /// Checks shared by both modalities; on success returns the position of
    /// the new record, already in the `Processing` phase.
    fn open_query(&mut self, now: u64, payload: QueryPayload) -> Result<usize, SessionError> {
        self.guard(now)?;
        let modality = payload.modality();
        if !self.mode.allows(modality) {
            let err = SessionError::ModeViolation { mode: self.mode, modality };
            return Err(self.reject(now, payload, err));
        }
        if self.in_flight().is_some() {
            return Err(self.reject(now, payload, SessionError::QueryInFlight));
        }
        if let QueryPayload::Sketch { sketch, .. } = &payload {
            if let Err(e) = sketch.validate() {
                return Err(self.reject(now, payload, e.into()));
            }
        }
        let query_id = self.next_query_id();
        self.events.push(SessionEvent::QuerySubmitted {
            t_ms: now,
            query_id,
            modality,
            payload_digest: payload.digest(),
            payload: payload.clone(),
        });
        let model = (modality == Modality::SketchPlusModel).then_some(self.current);
        self.log.push(QueryRecord {
            query_id,
            modality,
            phase: Phase::Input,
            payload,
            model,
            results: None,
            selection: None,
            rejection: None,
            started_ms: now,
            processed_ms: None,
            selected_ms: None,
        });
        let i = self.log.len() - 1;
        self.log[i].advance(Phase::Processing);
        Ok(i)
    }

    /// Stamped with the operation's own clock reading so a replay driven
    /// by recorded event times reproduces the log exactly.
    fn close_query(
        &mut self,
        now: u64,
        i: usize,
        results: ResultSet,
        descriptor: Option<AttributeVector>,
        visual_digest: Option<String>,
    ) -> ResultSet {
        let rec = &mut self.log[i];
        rec.results = Some(results.clone());
        rec.processed_ms = Some(now);
        rec.advance(Phase::Selection);
        self.events.push(SessionEvent::QueryProcessed {
            t_ms: now,
            query_id: rec.query_id,
            results: results.clone(),
            descriptor,
            visual_digest,
        });
        results
    }

    /// Interprets `text` against the running descriptor and ranks chairs by
    /// semantic distance. An empty text resubmits the descriptor unchanged.
    pub fn submit_voice(&mut self, text: &str) -> QueryResult {
        let now = self.clock.now_ms();
        let i = self.open_query(now, QueryPayload::Voice { text: text.into() })?;
        let engine = Arc::clone(&self.engine);
        let interp = apply_utterance(text, self.config.n_gram, &self.descriptor, engine.dictionary())?;
        self.descriptor = interp.vector;
        let results = engine.index().knn_semantic(&self.descriptor, TOP_K)?;
        Ok(self.close_query(now, i, results, Some(self.descriptor), None))
    }

    /// Renders the sketch (over the current chair when asked), encodes it and
    /// ranks chairs by visual distance.
    pub fn submit_sketch(&mut self, sketch: &Sketch, include_current_model: bool) -> QueryResult {
        let now = self.clock.now_ms();
        let payload = QueryPayload::Sketch {
            sketch: sketch.clone(),
            include_model: include_current_model,
        };
        let i = self.open_query(now, payload)?;
        let engine = Arc::clone(&self.engine);
        let model = if include_current_model {
            engine.model(self.current)
        } else {
            None
        };
        let visual = descriptor(sketch, model);
        let results = engine.index().knn_visual(&visual, TOP_K)?;
        Ok(self.close_query(now, i, results, None, Some(visual.digest())))
    }

    /// Picks a result of the pending query. The pick becomes the current
    /// chair and the voice descriptor is synchronized to it.
    pub fn select(&mut self, rank: usize) -> Result<ChairId, SessionError> {
        let now = self.clock.now_ms();
        self.guard(now)?;
        let i = self
            .log
            .iter()
            .rposition(|r| r.phase == Phase::Selection)
            .ok_or(SessionError::NoPendingSelection)?;
        let results = self.log[i].results.as_ref().expect("selection phase has results");
        let chair_id = results
            .get(rank)
            .ok_or(SessionError::RankOutOfRange { rank, len: results.len() })?
            .chair_id;
        let descriptor = self.engine.attributes(chair_id)?;
        let rec = &mut self.log[i];
        rec.selection = Some(chair_id);
        rec.selected_ms = Some(now);
        rec.advance(Phase::Completed);
        self.events.push(SessionEvent::QuerySelected {
            t_ms: now,
            query_id: rec.query_id,
            rank,
            chair_id,
        });
        self.current = chair_id;
        self.descriptor = descriptor;
        if chair_id == self.target {
            self.finish(now, SessionState::Succeeded);
        }
        Ok(chair_id)
    }

    pub fn abandon(&mut self) -> Result<(), SessionError> {
        let now = self.clock.now_ms();
        self.guard(now)?;
        self.finish(now, SessionState::Abandoned);
        Ok(())
    }

    /// Experimenter console edits of the running voice descriptor.
    pub fn edit_descriptor(&mut self, edit: DescriptorEdit) -> Result<AttributeVector, SessionError> {
        let now = self.clock.now_ms();
        self.guard(now)?;
        if !self.mode.allows_voice() {
            return Err(SessionError::ModeViolation {
                mode: self.mode,
                modality: Modality::Voice,
            });
        }
        match &edit {
            DescriptorEdit::Deltas { levels, colors } => {
                for d in levels {
                    self.descriptor.step(d.concept, d.delta);
                }
                for c in colors {
                    self.descriptor.set_color(c.part, c.color);
                }
            }
            DescriptorEdit::Reset => self.descriptor = AttributeVector::neutral(),
            DescriptorEdit::Sync => self.descriptor = self.engine.attributes(self.current)?,
        }
        self.events.push(SessionEvent::DescriptorEdited {
            t_ms: now,
            edit,
            descriptor: self.descriptor,
        });
        Ok(self.descriptor)
    }

    /// Success and cost figures as of now. Does not mutate.
    pub fn score(&self) -> Outcome {
        let accepted = || self.log.iter().filter(|r| r.accepted());
        let elapsed_ms = self.elapsed_ms();
        Outcome {
            state: self.state(),
            exact_success: self.current == self.target,
            shape_success: self.engine.shape_of(self.current) == self.engine.shape_of(self.target),
            elapsed_ms,
            elapsed_s: elapsed_ms as f64 / 1000.0,
            query_count: accepted().count(),
            voice_queries: accepted().filter(|r| r.modality == Modality::Voice).count(),
            sketch_queries: accepted().filter(|r| r.modality.is_sketch()).count(),
            rejected_queries: self.log.iter().filter(|r| !r.accepted()).count(),
        }
    }
}

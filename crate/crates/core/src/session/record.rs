//! Query records and session-level value types.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::concept::Concept;
use crate::dataset::ChairId;
use crate::index::ResultSet;
use crate::palette::{ColorId, PartKind};
use crate::sketch::Sketch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    VoiceOnly,
    SketchOnly,
    Hybrid,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::VoiceOnly, Mode::SketchOnly, Mode::Hybrid];

    pub fn allows(self, modality: Modality) -> bool {
        match (self, modality) {
            (Mode::Hybrid, _) => true,
            (Mode::VoiceOnly, Modality::Voice) => true,
            (Mode::SketchOnly, Modality::Sketch | Modality::SketchPlusModel) => true,
            _ => false,
        }
    }

    pub fn allows_voice(self) -> bool {
        self.allows(Modality::Voice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Voice,
    Sketch,
    SketchPlusModel,
}

impl Modality {
    pub fn is_sketch(self) -> bool {
        !matches!(self, Modality::Voice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Input,
    Processing,
    Selection,
    Completed,
    Rejected,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Completed | Phase::Rejected)
    }

    /// The only forward moves; anything else ends in `Rejected`.
    pub fn can_advance_to(self, next: Phase) -> bool {
        matches!(
            (self, next),
            (Phase::Input, Phase::Processing)
                | (Phase::Processing, Phase::Selection)
                | (Phase::Selection, Phase::Completed)
        ) || (!self.is_terminal() && next == Phase::Rejected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Active,
    Succeeded,
    TimedOut,
    Abandoned,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        self != SessionState::Active
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryPayload {
    Voice { text: String },
    Sketch { sketch: Sketch, include_model: bool },
}

impl QueryPayload {
    pub fn modality(&self) -> Modality {
        match self {
            QueryPayload::Voice { .. } => Modality::Voice,
            QueryPayload::Sketch { include_model: false, .. } => Modality::Sketch,
            QueryPayload::Sketch { include_model: true, .. } => Modality::SketchPlusModel,
        }
    }

    /// SHA-256 of the payload's JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("serializable");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub query_id: u32,
    pub modality: Modality,
    pub phase: Phase,
    pub payload: QueryPayload,
    /// Chair drawn under the sketch, for sketch-plus-model queries.
    pub model: Option<ChairId>,
    pub results: Option<ResultSet>,
    pub selection: Option<ChairId>,
    /// Error code when rejected.
    pub rejection: Option<String>,
    pub started_ms: u64,
    pub processed_ms: Option<u64>,
    pub selected_ms: Option<u64>,
}

impl QueryRecord {
    pub(crate) fn advance(&mut self, next: Phase) {
        debug_assert!(self.phase.can_advance_to(next), "{:?} -> {next:?}", self.phase);
        self.phase = if self.phase.can_advance_to(next) { next } else { Phase::Rejected };
    }

    /// Accepted queries are those that produced results.
    pub fn accepted(&self) -> bool {
        self.results.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelDelta {
    pub concept: Concept,
    pub delta: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorSet {
    pub part: PartKind,
    pub color: Option<ColorId>,
}

/// Direct descriptor edits from the experimenter console.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum DescriptorEdit {
    Deltas {
        #[serde(default)]
        levels: Vec<LevelDelta>,
        #[serde(default)]
        colors: Vec<ColorSet>,
    },
    /// Back to no colors and mid levels.
    Reset,
    /// Back to the current chair's ground truth.
    Sync,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub state: SessionState,
    pub exact_success: bool,
    pub shape_success: bool,
    pub elapsed_ms: u64,
    pub elapsed_s: f64,
    pub query_count: usize,
    pub voice_queries: usize,
    pub sketch_queries: usize,
    pub rejected_queries: usize,
}

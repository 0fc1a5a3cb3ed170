//! The semantic attribute vector: a per-part color one-hot block followed by
//! one discrete level per concept.

use serde::{Deserialize, Serialize};

use crate::concept::{Concept, MAX_LEVEL, MID_LEVEL};
use crate::palette::{ColorId, PartKind};

pub const COLOR_BLOCK_DIM: usize = PartKind::COUNT * ColorId::COUNT;
pub const SEMANTIC_DIM: usize = COLOR_BLOCK_DIM + Concept::COUNT;
/// Integer features are this multiple of the real-valued features, so a
/// concept level `l` becomes `l` and a hot color entry becomes `4`.
pub const SEMANTIC_SCALE: u32 = MAX_LEVEL as u32;

/// Integer-scaled feature vector; real value = entry / [`SEMANTIC_SCALE`].
pub type SemanticFeatures = [u8; SEMANTIC_DIM];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttributeVector {
    pub colors: [Option<ColorId>; PartKind::COUNT],
    pub levels: [u8; Concept::COUNT],
}

impl Default for AttributeVector {
    fn default() -> Self {
        Self::neutral()
    }
}

impl AttributeVector {
    /// No colors, every concept at the middle level.
    pub fn neutral() -> Self {
        AttributeVector {
            colors: [None; PartKind::COUNT],
            levels: [MID_LEVEL; Concept::COUNT],
        }
    }

    pub fn color(&self, part: PartKind) -> Option<ColorId> {
        self.colors[part.code()]
    }

    pub fn set_color(&mut self, part: PartKind, color: Option<ColorId>) {
        self.colors[part.code()] = color;
    }

    pub fn level(&self, concept: Concept) -> u8 {
        self.levels[concept.index()]
    }

    pub fn set_level(&mut self, concept: Concept, level: i32) {
        self.levels[concept.index()] = level.clamp(0, MAX_LEVEL as i32) as u8;
    }

    /// Moves a level by `delta` steps, saturating at the bounds.
    pub fn step(&mut self, concept: Concept, delta: i32) {
        self.set_level(concept, self.level(concept) as i32 + delta);
    }

    pub fn features(&self) -> SemanticFeatures {
        let mut f = [0u8; SEMANTIC_DIM];
        for part in PartKind::ALL {
            if let Some(c) = self.color(part) {
                f[part.code() * ColorId::COUNT + c.code()] = SEMANTIC_SCALE as u8;
            }
        }
        for (i, &l) in self.levels.iter().enumerate() {
            f[COLOR_BLOCK_DIM + i] = l.min(MAX_LEVEL);
        }
        f
    }

    /// Real-valued layout: colors in `{0, 1}`, levels divided by the level range.
    pub fn to_real(&self) -> Vec<f64> {
        self.features()
            .iter()
            .map(|&v| v as f64 / SEMANTIC_SCALE as f64)
            .collect()
    }

    /// Inverse of [`features`](Self::features). Rejects vectors with more than
    /// one hot color per part, non-scale color entries or out-of-range levels.
    pub fn from_features(f: &[u8]) -> Option<Self> {
        if f.len() != SEMANTIC_DIM {
            return None;
        }
        let mut v = AttributeVector::neutral();
        for part in PartKind::ALL {
            let block = &f[part.code() * ColorId::COUNT..(part.code() + 1) * ColorId::COUNT];
            let mut hot = None;
            for (c, &x) in block.iter().enumerate() {
                match x {
                    0 => {}
                    x if x as u32 == SEMANTIC_SCALE && hot.is_none() => hot = ColorId::from_code(c),
                    _ => return None,
                }
            }
            v.colors[part.code()] = hot;
        }
        for (i, &l) in f[COLOR_BLOCK_DIM..].iter().enumerate() {
            if l > MAX_LEVEL {
                return None;
            }
            v.levels[i] = l;
        }
        Some(v)
    }

    /// Squared distance in integer feature units.
    pub fn distance_sq_scaled(&self, other: &Self) -> u32 {
        squared_distance(&self.features(), &other.features())
    }

    /// Euclidean distance in the real-valued layout.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.distance_sq_scaled(other) as f64).sqrt() / SEMANTIC_SCALE as f64
    }
}

pub(crate) fn squared_distance(a: &[u8], b: &[u8]) -> u32 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i32 - y as i32;
            (d * d) as u32
        })
        .sum()
}

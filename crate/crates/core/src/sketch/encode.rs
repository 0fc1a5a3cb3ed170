//! Spatial color-occupancy view encoder and view pooling.
//!
//! Each snapshot is split into an 8x8 grid of 16x16-pixel cells; a cell
//! contributes, per color class, the fraction of its pixels in that class.
//! Fractions are kept as pixel counts out of [`CELL_PIXELS`], so all
//! arithmetic on descriptors is exact integer arithmetic.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::camera::VIEW_COUNT;
use super::raster::{snapshot_views, LabelImage, Model, Snapshot, LABEL_COUNT, SNAPSHOT_SIZE};
use super::stroke::Sketch;
use crate::dataset::ColorAssignment;
use crate::error::{Error, Result};
use crate::palette::ColorId;

pub const GRID: usize = 8;
pub const CELL_SIZE: usize = SNAPSHOT_SIZE / GRID;
pub const CELL_PIXELS: u16 = (CELL_SIZE * CELL_SIZE) as u16;
/// Background plus the six palette colors.
pub const CLASS_COUNT: usize = 1 + ColorId::COUNT;
pub const VISUAL_DIM: usize = GRID * GRID * CLASS_COUNT;

/// A per-view feature vector or a pooled descriptor. Component `i` is
/// `counts[i] / CELL_PIXELS`, laid out row-major by cell, class-minor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VisualDescriptor {
    counts: Vec<u16>,
}

impl VisualDescriptor {
    pub fn from_counts(counts: Vec<u16>) -> Result<Self> {
        if counts.len() != VISUAL_DIM {
            return Err(Error::DimensionMismatch {
                expected: VISUAL_DIM,
                found: counts.len(),
            });
        }
        if counts.iter().any(|&c| c > CELL_PIXELS) {
            return Err(Error::invalid("cell count exceeds cell size"));
        }
        Ok(VisualDescriptor { counts })
    }

    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    pub fn values(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / CELL_PIXELS as f64)
            .collect()
    }

    pub fn value(&self, cell_row: usize, cell_col: usize, class: usize) -> f64 {
        self.counts[(cell_row * GRID + cell_col) * CLASS_COUNT + class] as f64 / CELL_PIXELS as f64
    }

    /// Squared distance in count units (`CELL_PIXELS^2` per unit^2).
    pub fn distance_sq_scaled(&self, other: &Self) -> u64 {
        squared_distance_u16(&self.counts, &other.counts)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.distance_sq_scaled(other) as f64).sqrt() / CELL_PIXELS as f64
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.counts {
            h.update(c.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

fn squared_distance_u16(a: &[u16], b: &[u16]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum()
}

fn cell_of(x: usize, y: usize) -> usize {
    (y / CELL_SIZE) * GRID + x / CELL_SIZE
}

pub fn encode_view(snapshot: &Snapshot) -> VisualDescriptor {
    let mut counts = vec![0u16; VISUAL_DIM];
    for (i, &class) in snapshot.classes().iter().enumerate() {
        let cell = cell_of(i % SNAPSHOT_SIZE, i / SNAPSHOT_SIZE);
        counts[cell * CLASS_COUNT + class as usize] += 1;
    }
    VisualDescriptor { counts }
}

/// Element-wise maximum over exactly twelve view vectors.
pub fn pool_views(views: &[VisualDescriptor]) -> Result<VisualDescriptor> {
    if views.len() != VIEW_COUNT {
        return Err(Error::invalid(format!("expected {VIEW_COUNT} views, got {}", views.len())));
    }
    let mut counts = vec![0u16; VISUAL_DIM];
    for v in views {
        if v.counts.len() != VISUAL_DIM {
            return Err(Error::DimensionMismatch {
                expected: VISUAL_DIM,
                found: v.counts.len(),
            });
        }
        for (m, &c) in counts.iter_mut().zip(&v.counts) {
            *m = (*m).max(c);
        }
    }
    Ok(VisualDescriptor { counts })
}

/// Full sketch pipeline: render the twelve views, encode each, pool.
pub fn descriptor(sketch: &Sketch, model: Option<Model<'_>>) -> VisualDescriptor {
    let views: Vec<VisualDescriptor> = snapshot_views(sketch, model).iter().map(encode_view).collect();
    pool_views(&views).expect("twelve views of fixed dimension")
}

/// Per-cell label counts of a label image. Together with a coloring this
/// yields exactly [`encode_view`] of the resolved snapshot, without
/// touching pixels again.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelHistogram {
    counts: Vec<[u16; LABEL_COUNT]>,
}

impl LabelHistogram {
    pub fn new(image: &LabelImage) -> Self {
        let mut counts = vec![[0u16; LABEL_COUNT]; GRID * GRID];
        for (i, &label) in image.labels().iter().enumerate() {
            counts[cell_of(i % SNAPSHOT_SIZE, i / SNAPSHOT_SIZE)][label as usize] += 1;
        }
        LabelHistogram { counts }
    }

    pub fn encode(&self, assignment: Option<&ColorAssignment>) -> VisualDescriptor {
        let table = LabelImage::class_table(assignment);
        let mut counts = vec![0u16; VISUAL_DIM];
        for (cell, labels) in self.counts.iter().enumerate() {
            for (label, &n) in labels.iter().enumerate() {
                counts[cell * CLASS_COUNT + table[label] as usize] += n;
            }
        }
        VisualDescriptor { counts }
    }
}

//! Exact top-k Euclidean search over the semantic and visual descriptors of
//! every chair.
//!
//! Both descriptor spaces are stored as small integers (a fixed multiple of
//! the real-valued features), so squared distances are exact and ties are
//! real ties, broken by ascending chair id.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{semantic_vector, ChairId, DatasetManifest, ShapeId};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::query::{AttributeVector, SEMANTIC_DIM, SEMANTIC_SCALE};
use crate::sketch::{
    pool_views, rasterize_labels, LabelHistogram, Sketch, ViewCamera, VisualDescriptor, CELL_PIXELS,
    VISUAL_DIM,
};

/// Results returned per query.
pub const TOP_K: usize = 5;
/// Partial sums are compared against the current k-th best after every block.
const ABANDON_BLOCK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub chair_id: ChairId,
    pub distance: f64,
}

/// Ranked neighbors, ascending distance, ties by ascending chair id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub neighbors: Vec<Neighbor>,
}

impl ResultSet {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn chair_ids(&self) -> Vec<ChairId> {
        self.neighbors.iter().map(|n| n.chair_id).collect()
    }

    pub fn get(&self, rank: usize) -> Option<&Neighbor> {
        self.neighbors.get(rank)
    }

    pub fn contains(&self, chair_id: ChairId) -> bool {
        self.neighbors.iter().any(|n| n.chair_id == chair_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub chair_id: ChairId,
    pub shape_id: ShapeId,
    pub semantic: AttributeVector,
    pub visual: VisualDescriptor,
}

/// Immutable after construction; entries are kept sorted by chair id.
#[derive(Debug, Clone)]
pub struct Index {
    ids: Vec<ChairId>,
    shape_ids: Vec<ShapeId>,
    semantic: Vec<u8>,
    visual: Vec<u16>,
}

type Scored = (u64, ChairId);

fn block_sq<T: Copy + Into<i64>>(a: &[T], b: &[T]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x.into() - y.into();
            (d * d) as u64
        })
        .sum()
}

/// Bounded top-k scan that abandons a row once its partial squared distance
/// exceeds the current k-th best. Rows are visited in ascending id order, so
/// an equal distance never displaces an earlier entry.
fn top_k_abandoning<T: Copy + Into<i64>>(data: &[T], dim: usize, ids: &[ChairId], q: &[T], k: usize) -> Vec<Scored> {
    let mut best: Vec<Scored> = Vec::with_capacity(k + 1);
    if k == 0 {
        return best;
    }
    'rows: for (row, &id) in data.chunks_exact(dim).zip(ids) {
        let bound = (best.len() == k).then(|| best[k - 1].0);
        let mut acc = 0u64;
        for (r, qb) in row.chunks(ABANDON_BLOCK).zip(q.chunks(ABANDON_BLOCK)) {
            acc += block_sq(r, qb);
            if bound.is_some_and(|b| acc > b) {
                continue 'rows;
            }
        }
        if bound.is_some_and(|b| acc >= b) {
            continue;
        }
        let pos = best.partition_point(|e| e.0 <= acc);
        best.insert(pos, (acc, id));
        best.truncate(k);
    }
    best
}

fn full_scan<T: Copy + Into<i64>>(data: &[T], dim: usize, ids: &[ChairId], q: &[T], k: usize) -> Vec<Scored> {
    let mut all: Vec<Scored> = data
        .chunks_exact(dim)
        .zip(ids)
        .map(|(row, &id)| (block_sq(row, q), id))
        .collect();
    all.sort_unstable();
    all.truncate(k);
    all
}

fn to_results(scored: Vec<Scored>, scale: f64) -> ResultSet {
    ResultSet {
        neighbors: scored
            .into_iter()
            .map(|(d2, chair_id)| Neighbor {
                chair_id,
                distance: (d2 as f64).sqrt() / scale,
            })
            .collect(),
    }
}

impl Index {
    pub fn from_entries(mut entries: Vec<IndexEntry>) -> Result<Index> {
        entries.sort_by_key(|e| e.chair_id);
        if let Some(w) = entries.windows(2).find(|w| w[0].chair_id == w[1].chair_id) {
            return Err(Error::invalid(format!("duplicate chair id {}", w[0].chair_id)));
        }
        let mut index = Index {
            ids: Vec::with_capacity(entries.len()),
            shape_ids: Vec::with_capacity(entries.len()),
            semantic: Vec::with_capacity(entries.len() * SEMANTIC_DIM),
            visual: Vec::with_capacity(entries.len() * VISUAL_DIM),
        };
        for e in entries {
            index.ids.push(e.chair_id);
            index.shape_ids.push(e.shape_id);
            index.semantic.extend_from_slice(&e.semantic.features());
            index.visual.extend_from_slice(e.visual.counts());
        }
        Ok(index)
    }

    /// Indexes every instance: its ground-truth attribute vector and the
    /// descriptor of the chair drawn alone. Each shape is rendered once per
    /// view and recolored per instance.
    pub fn build(manifest: &DatasetManifest, dictionary: &Dictionary) -> Result<Index> {
        let cameras = ViewCamera::all();
        let empty = Sketch::empty();
        let mut entries = Vec::with_capacity(manifest.instances.len());
        for shape in &manifest.shapes {
            let histograms: Vec<LabelHistogram> = cameras
                .iter()
                .map(|cam| LabelHistogram::new(&rasterize_labels(cam, &empty, Some(shape))))
                .collect();
            for inst in manifest.instances.iter().filter(|i| i.shape_id == shape.shape_id) {
                let views: Vec<VisualDescriptor> =
                    histograms.iter().map(|h| h.encode(Some(&inst.assignment))).collect();
                entries.push(IndexEntry {
                    chair_id: inst.chair_id,
                    shape_id: inst.shape_id,
                    semantic: semantic_vector(inst, manifest, dictionary)?,
                    visual: pool_views(&views)?,
                });
            }
        }
        if entries.len() != manifest.instances.len() {
            return Err(Error::invalid("instance references a missing shape"));
        }
        Index::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn chair_ids(&self) -> &[ChairId] {
        &self.ids
    }

    fn position(&self, chair_id: ChairId) -> Option<usize> {
        self.ids.binary_search(&chair_id).ok()
    }

    pub fn shape_of(&self, chair_id: ChairId) -> Option<ShapeId> {
        self.position(chair_id).map(|i| self.shape_ids[i])
    }

    pub fn entry(&self, chair_id: ChairId) -> Option<IndexEntry> {
        let i = self.position(chair_id)?;
        Some(IndexEntry {
            chair_id,
            shape_id: self.shape_ids[i],
            semantic: AttributeVector::from_features(&self.semantic[i * SEMANTIC_DIM..(i + 1) * SEMANTIC_DIM])
                .expect("stored from a valid vector"),
            visual: VisualDescriptor::from_counts(self.visual[i * VISUAL_DIM..(i + 1) * VISUAL_DIM].to_vec())
                .expect("stored from a valid descriptor"),
        })
    }

    /// SHA-256 over every entry in chair-id order.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (i, id) in self.ids.iter().enumerate() {
            h.update(id.to_le_bytes());
            h.update(self.shape_ids[i].to_le_bytes());
            h.update(&self.semantic[i * SEMANTIC_DIM..(i + 1) * SEMANTIC_DIM]);
            for c in &self.visual[i * VISUAL_DIM..(i + 1) * VISUAL_DIM] {
                h.update(c.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    fn check<T>(&self, query: &[T], dim: usize) -> Result<()> {
        if query.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: query.len(),
            });
        }
        if self.is_empty() {
            return Err(Error::EmptyIndex);
        }
        Ok(())
    }

    /// Top-k by semantic distance; `query` is an integer feature vector as
    /// produced by [`AttributeVector::features`].
    pub fn knn_semantic_features(&self, query: &[u8], k: usize) -> Result<ResultSet> {
        self.check(query, SEMANTIC_DIM)?;
        let best = top_k_abandoning(&self.semantic, SEMANTIC_DIM, &self.ids, query, k);
        Ok(to_results(best, SEMANTIC_SCALE as f64))
    }

    pub fn knn_semantic(&self, query: &AttributeVector, k: usize) -> Result<ResultSet> {
        self.knn_semantic_features(&query.features(), k)
    }

    pub fn knn_visual(&self, query: &VisualDescriptor, k: usize) -> Result<ResultSet> {
        self.check(query.counts(), VISUAL_DIM)?;
        let best = top_k_abandoning(&self.visual, VISUAL_DIM, &self.ids, query.counts(), k);
        Ok(to_results(best, CELL_PIXELS as f64))
    }

    /// Reference implementation: score every entry, sort, truncate.
    pub fn full_scan_semantic(&self, query: &AttributeVector, k: usize) -> Result<ResultSet> {
        let q = query.features();
        self.check(&q, SEMANTIC_DIM)?;
        Ok(to_results(full_scan(&self.semantic, SEMANTIC_DIM, &self.ids, &q, k), SEMANTIC_SCALE as f64))
    }

    pub fn full_scan_visual(&self, query: &VisualDescriptor, k: usize) -> Result<ResultSet> {
        self.check(query.counts(), VISUAL_DIM)?;
        Ok(to_results(
            full_scan(&self.visual, VISUAL_DIM, &self.ids, query.counts(), k),
            CELL_PIXELS as f64,
        ))
    }
}

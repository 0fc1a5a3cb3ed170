//! Per-shape stroke traces a simulated user draws to depict a chair.
//!
//! Each connected mesh component is traced along its principal axis; wide
//! components are hatched with parallel lanes so their footprint is covered.

use std::collections::BTreeMap;

use chairsearch_core::dataset::{ChairShape, DatasetManifest, Point3, ShapeId};
use chairsearch_core::palette::{ColorId, PartKind};
use chairsearch_core::sketch::{Sketch, Stroke, WORKING_HALF_EXTENT};
use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Result, SimError};

/// Widest stroke a simulated user draws; broader surfaces get more lanes.
pub const MAX_STROKE_WIDTH: f64 = 0.12;
pub const MIN_STROKE_WIDTH: f64 = 0.02;

/// An uncolored stroke belonging to one part.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedStroke {
    pub part: PartKind,
    pub points: Vec<Point3>,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Silhouette {
    pub shape_id: ShapeId,
    pub strokes: Vec<TracedStroke>,
}

impl Silhouette {
    pub fn trace(shape: &ChairShape) -> Silhouette {
        let mut strokes = Vec::new();
        for (&part, mesh) in &shape.parts {
            for component in mesh.components() {
                for (points, width) in trace_component(&component) {
                    strokes.push(TracedStroke { part, points, width });
                }
            }
        }
        Silhouette { shape_id: shape.shape_id, strokes }
    }

    pub fn len(&self) -> usize {
        self.strokes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }

    pub fn parts(&self) -> Vec<PartKind> {
        let mut parts: Vec<PartKind> = self.strokes.iter().map(|s| s.part).collect();
        parts.dedup();
        parts.sort();
        parts.dedup();
        parts
    }

    /// Colors every stroke with the color chosen for its part.
    pub fn sketch(&self, color_of: impl Fn(PartKind) -> ColorId) -> Result<Sketch> {
        if self.is_empty() {
            return Err(SimError::EmptySilhouette(self.shape_id));
        }
        let strokes = self
            .strokes
            .iter()
            .map(|s| Stroke::new(s.points.clone(), color_of(s.part), s.width))
            .collect::<chairsearch_core::Result<Vec<_>>>()?;
        Ok(Sketch { strokes })
    }
}

/// Silhouettes for every shape of a manifest, traced once.
#[derive(Debug, Clone, Default)]
pub struct SilhouetteLibrary {
    shapes: BTreeMap<ShapeId, Silhouette>,
}

impl SilhouetteLibrary {
    pub fn build(manifest: &DatasetManifest) -> SilhouetteLibrary {
        SilhouetteLibrary {
            shapes: manifest
                .shapes
                .iter()
                .map(|s| (s.shape_id, Silhouette::trace(s)))
                .collect(),
        }
    }

    pub fn insert(&mut self, silhouette: Silhouette) {
        self.shapes.insert(silhouette.shape_id, silhouette);
    }

    pub fn get(&self, shape_id: ShapeId) -> Result<&Silhouette> {
        match self.shapes.get(&shape_id) {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(SimError::EmptySilhouette(shape_id)),
        }
    }
}

fn trace_component(points: &[Point3]) -> Vec<(Vec<Point3>, f64)> {
    if points.is_empty() {
        return Vec::new();
    }
    let n = points.len() as f64;
    let pts: Vec<Vector3<f64>> = points.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect();
    let centroid = pts.iter().fold(Vector3::zeros(), |a, p| a + p) / n;
    let cov = pts.iter().fold(Matrix3::zeros(), |a, p| {
        let d = p - centroid;
        a + d * d.transpose()
    }) / n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let axes: Vec<Vector3<f64>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();

    let span = |axis: &Vector3<f64>| {
        pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let t = (p - centroid).dot(axis);
            (lo.min(t), hi.max(t))
        })
    };
    let (lo0, hi0) = span(&axes[0]);
    let (lo1, hi1) = span(&axes[1]);
    let (lo2, hi2) = span(&axes[2]);
    let breadth = hi1 - lo1;
    let lanes = ((breadth / MAX_STROKE_WIDTH).ceil() as usize).max(1);
    let width = (breadth / lanes as f64)
        .max(hi2 - lo2)
        .clamp(MIN_STROKE_WIDTH, MAX_STROKE_WIDTH);
    let inset = (width / 2.0).min((hi0 - lo0) / 2.0);
    let depth = (lo2 + hi2) / 2.0;

    (0..lanes)
        .map(|i| {
            let across = lo1 + (i as f64 + 0.5) * breadth / lanes as f64;
            let at = |t: f64| {
                let p = centroid + axes[0] * t + axes[1] * across + axes[2] * depth;
                [0, 1, 2].map(|k| p[k].clamp(-WORKING_HALF_EXTENT, WORKING_HALF_EXTENT))
            };
            (vec![at(lo0 + inset), at(hi0 - inset)], width)
        })
        .collect()
}

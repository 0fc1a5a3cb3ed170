//! Software rasterizer for strokes and colored part meshes.
//!
//! Triangles are filled flat with barycentric depth; strokes are drawn as
//! screen-space capsules around each projected segment. A fragment is kept
//! when it is nearer than what the pixel holds; strokes also win exact ties.

use std::io::Cursor;

use serde::{Deserialize, Serialize};

use super::camera::{ViewCamera, VIEW_COUNT};
use super::stroke::Sketch;
use crate::dataset::{ChairShape, ColorAssignment};
use crate::error::{Error, Result};
use crate::palette::{ColorId, PartKind};

pub const SNAPSHOT_SIZE: usize = 128;
/// Strokes thinner than this still cover a visible line.
pub const MIN_STROKE_RADIUS_PX: f64 = 0.75;

/// Number of distinct pixel labels: background, four parts, six stroke colors.
pub const LABEL_COUNT: usize = 1 + PartKind::COUNT + ColorId::COUNT;
const BACKGROUND: u8 = 0;

fn part_label(part: PartKind) -> u8 {
    1 + part.code() as u8
}

fn stroke_label(color: ColorId) -> u8 {
    (1 + PartKind::COUNT + color.code()) as u8
}

/// A chair to draw: its geometry and part colors.
#[derive(Debug, Clone, Copy)]
pub struct Model<'a> {
    pub shape: &'a ChairShape,
    pub assignment: &'a ColorAssignment,
}

/// Scene labels per pixel before part colors are resolved, so one render of a
/// shape serves all of its colorings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelImage {
    labels: Vec<u8>,
}

impl LabelImage {
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Maps a label to its color class (0 = background, `1 + color code`).
    /// Parts without a color are treated as background.
    pub fn class_table(assignment: Option<&ColorAssignment>) -> [u8; LABEL_COUNT] {
        let mut table = [0u8; LABEL_COUNT];
        for part in PartKind::ALL {
            if let Some(c) = assignment.and_then(|a| a.color(part)) {
                table[part_label(part) as usize] = 1 + c.code() as u8;
            }
        }
        for c in ColorId::ALL {
            table[stroke_label(c) as usize] = 1 + c.code() as u8;
        }
        table
    }

    pub fn resolve(&self, assignment: Option<&ColorAssignment>) -> Snapshot {
        let table = Self::class_table(assignment);
        Snapshot {
            pixels: self.labels.iter().map(|&l| table[l as usize]).collect(),
        }
    }
}

/// A rendered view: one color class per pixel, row-major, `0` for background
/// and `1 + color code` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Snapshot {
    pixels: Vec<u8>,
}

impl Snapshot {
    pub const WIDTH: usize = SNAPSHOT_SIZE;
    pub const HEIGHT: usize = SNAPSHOT_SIZE;

    pub fn from_classes(pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != SNAPSHOT_SIZE * SNAPSHOT_SIZE {
            return Err(Error::DimensionMismatch {
                expected: SNAPSHOT_SIZE * SNAPSHOT_SIZE,
                found: pixels.len(),
            });
        }
        if pixels.iter().any(|&p| p as usize > ColorId::COUNT) {
            return Err(Error::invalid("pixel class out of range"));
        }
        Ok(Snapshot { pixels })
    }

    /// Builds a snapshot from a per-pixel function of `(x, y)`.
    pub fn from_fn(f: impl Fn(usize, usize) -> Option<ColorId>) -> Self {
        let mut pixels = Vec::with_capacity(SNAPSHOT_SIZE * SNAPSHOT_SIZE);
        for y in 0..SNAPSHOT_SIZE {
            for x in 0..SNAPSHOT_SIZE {
                pixels.push(f(x, y).map_or(0, |c| 1 + c.code() as u8));
            }
        }
        Snapshot { pixels }
    }

    pub fn background() -> Self {
        Self::from_fn(|_, _| None)
    }

    pub fn classes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Option<ColorId> {
        match self.pixels[y * SNAPSHOT_SIZE + x] {
            0 => None,
            c => ColorId::from_code(c as usize - 1),
        }
    }

    pub fn count(&self, color: Option<ColorId>) -> usize {
        let class = color.map_or(0, |c| 1 + c.code() as u8);
        self.pixels.iter().filter(|&&p| p == class).count()
    }

    pub fn colors_present(&self) -> Vec<ColorId> {
        ColorId::ALL
            .into_iter()
            .filter(|&c| self.count(Some(c)) > 0)
            .collect()
    }

    /// RGB PNG with a white background.
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(Cursor::new(&mut out), SNAPSHOT_SIZE as u32, SNAPSHOT_SIZE as u32);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header().map_err(|e| Error::Format(e.to_string()))?;
            let data: Vec<u8> = self
                .pixels
                .iter()
                .flat_map(|&p| match p {
                    0 => [255, 255, 255],
                    c => ColorId::from_code(c as usize - 1).expect("valid class").rgb8(),
                })
                .collect();
            writer
                .write_image_data(&data)
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        Ok(out)
    }
}

struct Target {
    labels: Vec<u8>,
    depth: Vec<f64>,
}

impl Target {
    fn new() -> Self {
        Target {
            labels: vec![BACKGROUND; SNAPSHOT_SIZE * SNAPSHOT_SIZE],
            depth: vec![f64::NEG_INFINITY; SNAPSHOT_SIZE * SNAPSHOT_SIZE],
        }
    }
}

/// Inclusive pixel range whose centres may fall within `[lo, hi]`.
fn pixel_span(lo: f64, hi: f64) -> Option<(usize, usize)> {
    let first = (lo - 0.5).ceil().max(0.0);
    let last = (hi - 0.5).floor().min(SNAPSHOT_SIZE as f64 - 1.0);
    (first <= last).then_some((first as usize, last as usize))
}

fn edge(a: [f64; 3], b: [f64; 3], px: f64, py: f64) -> f64 {
    (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0])
}

fn fill_triangle(t: &mut Target, v: [[f64; 3]; 3], label: u8) {
    let area = edge(v[0], v[1], v[2][0], v[2][1]);
    if area == 0.0 {
        return;
    }
    let min = |k: usize| v[0][k].min(v[1][k]).min(v[2][k]);
    let max = |k: usize| v[0][k].max(v[1][k]).max(v[2][k]);
    let (Some((x0, x1)), Some((y0, y1))) = (pixel_span(min(0), max(0)), pixel_span(min(1), max(1))) else {
        return;
    };
    for y in y0..=y1 {
        let py = y as f64 + 0.5;
        for x in x0..=x1 {
            let px = x as f64 + 0.5;
            let w0 = edge(v[1], v[2], px, py) / area;
            let w1 = edge(v[2], v[0], px, py) / area;
            let w2 = edge(v[0], v[1], px, py) / area;
            if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                continue;
            }
            let z = w0 * v[0][2] + w1 * v[1][2] + w2 * v[2][2];
            let i = y * SNAPSHOT_SIZE + x;
            if z > t.depth[i] {
                t.depth[i] = z;
                t.labels[i] = label;
            }
        }
    }
}

fn draw_capsule(t: &mut Target, a: [f64; 3], b: [f64; 3], radius: f64, label: u8) {
    let (Some((x0, x1)), Some((y0, y1))) = (
        pixel_span(a[0].min(b[0]) - radius, a[0].max(b[0]) + radius),
        pixel_span(a[1].min(b[1]) - radius, a[1].max(b[1]) + radius),
    ) else {
        return;
    };
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let r2 = radius * radius;
    for y in y0..=y1 {
        let py = y as f64 + 0.5;
        for x in x0..=x1 {
            let px = x as f64 + 0.5;
            let s = if len2 > 0.0 {
                (((px - a[0]) * dx + (py - a[1]) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let (cx, cy) = (a[0] + s * dx - px, a[1] + s * dy - py);
            if cx * cx + cy * cy > r2 {
                continue;
            }
            let z = a[2] + s * (b[2] - a[2]);
            let i = y * SNAPSHOT_SIZE + x;
            if z >= t.depth[i] {
                t.depth[i] = z;
                t.labels[i] = label;
            }
        }
    }
}

/// Renders one view into scene labels. Part meshes first, in part order, then
/// strokes in sketch order.
pub fn rasterize_labels(camera: &ViewCamera, sketch: &Sketch, shape: Option<&ChairShape>) -> LabelImage {
    let mut t = Target::new();
    if let Some(shape) = shape {
        for (&part, mesh) in &shape.parts {
            let projected: Vec<[f64; 3]> = mesh
                .vertices
                .iter()
                .map(|&p| camera.project(p, SNAPSHOT_SIZE))
                .collect();
            for tri in &mesh.triangles {
                let v = tri.map(|i| projected[i as usize]);
                fill_triangle(&mut t, v, part_label(part));
            }
        }
    }
    let ppu = camera.pixels_per_unit(SNAPSHOT_SIZE);
    for stroke in &sketch.strokes {
        let radius = (stroke.width * 0.5 * ppu).max(MIN_STROKE_RADIUS_PX);
        let label = stroke_label(stroke.color);
        let projected: Vec<[f64; 3]> = stroke
            .points
            .iter()
            .map(|&p| camera.project(p, SNAPSHOT_SIZE))
            .collect();
        for seg in projected.windows(2) {
            draw_capsule(&mut t, seg[0], seg[1], radius, label);
        }
    }
    LabelImage { labels: t.labels }
}

pub fn rasterize(camera: &ViewCamera, sketch: &Sketch, model: Option<Model<'_>>) -> Snapshot {
    rasterize_labels(camera, sketch, model.map(|m| m.shape)).resolve(model.map(|m| m.assignment))
}

/// The twelve fixed views of a sketch, optionally drawn over a chair.
pub fn snapshot_views(sketch: &Sketch, model: Option<Model<'_>>) -> Vec<Snapshot> {
    if sketch.is_empty() && model.is_none() {
        return vec![Snapshot::background(); VIEW_COUNT];
    }
    ViewCamera::all()
        .iter()
        .map(|cam| rasterize(cam, sketch, model))
        .collect()
}

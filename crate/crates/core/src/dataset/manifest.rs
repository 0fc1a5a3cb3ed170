//! The chair database manifest: construction, reference shape set, and the
//! on-disk document.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::assignment::{enumerate_assignments, ColorAssignment};
use super::shape::{generate_parametric_shape, ChairShape, LegStyle, ShapeId, StyleParams};
use crate::error::{Error, Result};
use crate::palette::{ColorId, PartKind};

pub type ChairId = u32;

pub const MANIFEST_VERSION: &str = "chairsearch-manifest/1";
/// Stride of the chair-id scheme: `chair_id = shape_id * MAX_VARIATIONS + rank`.
pub const MAX_VARIATIONS: u32 = 360;
pub const REFERENCE_SHAPE_COUNT: usize = 45;
pub const REFERENCE_SEED: u64 = 0x5eed_c4a1_2024;
/// Shape id of the starting chair; never part of a manifest.
pub const PLACEHOLDER_SHAPE_ID: ShapeId = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChairInstance {
    pub chair_id: ChairId,
    pub shape_id: ShapeId,
    pub assignment: ColorAssignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: String,
    pub dictionary_checksum: String,
    pub shape_count: usize,
    pub instance_count: usize,
    pub shapes: Vec<ChairShape>,
    pub instances: Vec<ChairInstance>,
}

impl DatasetManifest {
    pub fn shape(&self, shape_id: ShapeId) -> Option<&ChairShape> {
        self.shapes
            .binary_search_by_key(&shape_id, |s| s.shape_id)
            .ok()
            .map(|i| &self.shapes[i])
    }

    pub fn instance(&self, chair_id: ChairId) -> Option<&ChairInstance> {
        self.instances
            .binary_search_by_key(&chair_id, |c| c.chair_id)
            .ok()
            .map(|i| &self.instances[i])
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::VersionMismatch {
                expected: MANIFEST_VERSION.into(),
                found: self.version.clone(),
            });
        }
        if self.shape_count != self.shapes.len() || self.instance_count != self.instances.len() {
            return Err(Error::invalid("manifest counts do not match list lengths"));
        }
        if !self.shapes.windows(2).all(|w| w[0].shape_id < w[1].shape_id) {
            return Err(Error::invalid("shapes are not sorted by unique shape id"));
        }
        if !self.instances.windows(2).all(|w| w[0].chair_id < w[1].chair_id) {
            return Err(Error::invalid("instances are not sorted by unique chair id"));
        }
        for inst in &self.instances {
            let shape = self
                .shape(inst.shape_id)
                .ok_or_else(|| Error::NotFound(format!("shape {}", inst.shape_id)))?;
            let parts: Vec<PartKind> = inst.assignment.parts().collect();
            if parts != shape.part_kinds() || !inst.assignment.is_injective() {
                return Err(Error::invalid(format!(
                    "chair {} has an assignment that does not fit its shape",
                    inst.chair_id
                )));
            }
        }
        Ok(())
    }

    pub fn content_checksum(&self) -> Result<String> {
        let body = serde_json::to_vec(self)?;
        Ok(hex::encode(Sha256::digest(&body)))
    }
}

/// Expands every shape into all of its injective colorings.
pub fn build_dataset(mut shapes: Vec<ChairShape>, dictionary_checksum: &str) -> Result<DatasetManifest> {
    shapes.sort_by_key(|s| s.shape_id);
    if let Some(w) = shapes.windows(2).find(|w| w[0].shape_id == w[1].shape_id) {
        return Err(Error::invalid(format!("duplicate shape id {}", w[0].shape_id)));
    }
    let mut instances = Vec::new();
    for shape in &shapes {
        shape.validate()?;
        if shape.shape_id >= u32::MAX / MAX_VARIATIONS {
            return Err(Error::invalid(format!("shape id {} too large", shape.shape_id)));
        }
        let assignments = enumerate_assignments(&shape.part_kinds())?;
        instances.extend(assignments.into_iter().enumerate().map(|(rank, assignment)| {
            ChairInstance {
                chair_id: shape.shape_id * MAX_VARIATIONS + rank as u32,
                shape_id: shape.shape_id,
                assignment,
            }
        }));
    }
    Ok(DatasetManifest {
        version: MANIFEST_VERSION.into(),
        dictionary_checksum: dictionary_checksum.into(),
        shape_count: shapes.len(),
        instance_count: instances.len(),
        shapes,
        instances,
    })
}

/// Randomly drawn four-part styles whose concept-level vectors are pairwise
/// distinct. Deterministic for a given seed.
pub fn reference_styles(count: usize, seed: u64) -> Vec<StyleParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut u = || rng.random::<f64>();
        let style = StyleParams {
            seat_width: u(),
            seat_depth: u(),
            seat_height: u(),
            seat_thickness: u(),
            back_height: u(),
            back_width: u(),
            back_curvature: u(),
            back_tilt: u(),
            back_slats: u(),
            leg_thickness: u(),
            leg_splay: u(),
            leg_style: match (u() * 3.0) as u32 {
                0 => LegStyle::FourPosts,
                1 => LegStyle::Pedestal,
                _ => LegStyle::Sled,
            },
            has_arms: true,
            arm_length: u(),
            arm_thickness: u(),
            arm_height: u(),
            modernity: u(),
            ornament: u(),
        };
        if seen.insert(style.attribute_levels()) {
            out.push(style);
        }
    }
    out
}

/// The 45-shape reference set, shape ids `0..45`.
pub fn reference_shapes() -> Result<Vec<ChairShape>> {
    reference_styles(REFERENCE_SHAPE_COUNT, REFERENCE_SEED)
        .iter()
        .enumerate()
        .map(|(i, style)| generate_parametric_shape(style, i as ShapeId))
        .collect()
}

/// The fixed starting chair shown before any selection.
pub fn placeholder_chair() -> (ChairShape, ColorAssignment) {
    let style = StyleParams {
        back_slats: 0.1,
        leg_splay: 0.0,
        ornament: 0.0,
        ..StyleParams::default()
    };
    let shape = generate_parametric_shape(&style, PLACEHOLDER_SHAPE_ID).expect("valid style");
    let assignment = ColorAssignment::from_pairs(&[
        (PartKind::Arms, ColorId::Yellow),
        (PartKind::Back, ColorId::Cyan),
        (PartKind::Seat, ColorId::Magenta),
        (PartKind::Legs, ColorId::Green),
    ])
    .expect("injective");
    (shape, assignment)
}

#[derive(Deserialize)]
struct VersionProbe {
    version: String,
}

#[derive(Serialize, Deserialize)]
struct ManifestDocument {
    version: String,
    checksum: String,
    manifest: DatasetManifest,
}

/// Serializes the manifest document. Output depends only on the manifest.
pub fn manifest_to_string(manifest: &DatasetManifest) -> Result<String> {
    let doc = ManifestDocument {
        version: manifest.version.clone(),
        checksum: manifest.content_checksum()?,
        manifest: manifest.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn manifest_from_str(text: &str) -> Result<DatasetManifest> {
    let probe: VersionProbe = serde_json::from_str(text)?;
    if probe.version != MANIFEST_VERSION {
        return Err(Error::VersionMismatch {
            expected: MANIFEST_VERSION.into(),
            found: probe.version,
        });
    }
    let doc: ManifestDocument = serde_json::from_str(text)?;
    let actual = doc.manifest.content_checksum()?;
    if actual != doc.checksum {
        return Err(Error::ChecksumMismatch {
            what: "manifest",
            expected: doc.checksum,
            found: actual,
        });
    }
    doc.manifest.validate()?;
    Ok(doc.manifest)
}

pub fn save_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let text = manifest_to_string(manifest)?;
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.sync_all()?;
    Ok(())
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    manifest_from_str(&fs::read_to_string(path)?)
}

//! The variational chair database: parametric shapes, injective part
//! colorings, ground-truth attributes and the manifest document.

mod assignment;
mod manifest;
pub mod mesh;
mod shape;

pub use assignment::{assignment_rank, enumerate_assignments, variation_count, ColorAssignment};
pub use manifest::{
    build_dataset, load_manifest, manifest_from_str, manifest_to_string, placeholder_chair,
    reference_shapes, reference_styles, save_manifest, ChairId, ChairInstance, DatasetManifest,
    MANIFEST_VERSION, MAX_VARIATIONS, PLACEHOLDER_SHAPE_ID, REFERENCE_SEED, REFERENCE_SHAPE_COUNT,
};
pub use mesh::{PartMesh, Point3};
pub use shape::{
    export_part_meshes, generate_parametric_shape, import_part_meshes, ChairShape, LegStyle,
    ShapeId, StyleParams,
};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::query::AttributeVector;

/// Ground-truth attribute vector of a colored shape.
pub fn attribute_vector(shape: &ChairShape, assignment: &ColorAssignment) -> AttributeVector {
    AttributeVector {
        colors: *assignment.slots(),
        levels: shape.attributes,
    }
}

/// Ground-truth attribute vector of a manifest instance.
pub fn semantic_vector(
    instance: &ChairInstance,
    manifest: &DatasetManifest,
    dictionary: &Dictionary,
) -> Result<AttributeVector> {
    if manifest.dictionary_checksum != dictionary.checksum {
        return Err(Error::ChecksumMismatch {
            what: "dictionary",
            expected: manifest.dictionary_checksum.clone(),
            found: dictionary.checksum.clone(),
        });
    }
    let shape = manifest
        .shape(instance.shape_id)
        .ok_or_else(|| Error::NotFound(format!("shape {}", instance.shape_id)))?;
    Ok(attribute_vector(shape, &instance.assignment))
}

/// Descriptor state after selecting `chair_id`: its ground truth.
pub fn sync_from_selection(
    chair_id: ChairId,
    manifest: &DatasetManifest,
    dictionary: &Dictionary,
) -> Result<AttributeVector> {
    let instance = manifest
        .instance(chair_id)
        .ok_or_else(|| Error::NotFound(format!("chair {chair_id}")))?;
    semantic_vector(instance, manifest, dictionary)
}

/// The 16,200-chair reference database bound to the built-in dictionary.
pub fn reference_manifest() -> Result<DatasetManifest> {
    build_dataset(reference_shapes()?, &Dictionary::builtin().checksum)
}

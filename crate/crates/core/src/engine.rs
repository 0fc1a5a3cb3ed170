//! Shared, immutable retrieval context: manifest, dictionary, index and the
//! placeholder chair every session starts from.

use crate::dataset::{
    attribute_vector, placeholder_chair, reference_manifest, ChairId, ChairShape, ColorAssignment,
    DatasetManifest, ShapeId, PLACEHOLDER_SHAPE_ID,
};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::index::Index;
use crate::query::AttributeVector;
use crate::sketch::{rasterize, Model, Sketch, Snapshot, ViewCamera};

/// Chair id of the placeholder; never a manifest id.
pub const PLACEHOLDER_CHAIR_ID: ChairId = u32::MAX;

#[derive(Debug)]
pub struct Engine {
    manifest: DatasetManifest,
    dictionary: Dictionary,
    index: Index,
    placeholder: (ChairShape, ColorAssignment),
    manifest_checksum: String,
}

impl Engine {
    pub fn new(manifest: DatasetManifest, dictionary: Dictionary) -> Result<Engine> {
        manifest.validate()?;
        if manifest.dictionary_checksum != dictionary.checksum {
            return Err(Error::ChecksumMismatch {
                what: "dictionary",
                expected: manifest.dictionary_checksum.clone(),
                found: dictionary.checksum.clone(),
            });
        }
        let index = Index::build(&manifest, &dictionary)?;
        Ok(Engine {
            manifest_checksum: manifest.content_checksum()?,
            manifest,
            dictionary,
            index,
            placeholder: placeholder_chair(),
        })
    }

    /// The 45-shape reference database with the built-in dictionary.
    pub fn reference() -> Result<Engine> {
        Engine::new(reference_manifest()?, Dictionary::builtin())
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn manifest_checksum(&self) -> &str {
        &self.manifest_checksum
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    /// Whether `chair_id` is a database chair (the placeholder is not).
    pub fn contains(&self, chair_id: ChairId) -> bool {
        self.manifest.instance(chair_id).is_some()
    }

    /// Geometry and colors of a database chair or the placeholder.
    pub fn model(&self, chair_id: ChairId) -> Option<Model<'_>> {
        if chair_id == PLACEHOLDER_CHAIR_ID {
            let (shape, assignment) = &self.placeholder;
            return Some(Model { shape, assignment });
        }
        let inst = self.manifest.instance(chair_id)?;
        Some(Model {
            shape: self.manifest.shape(inst.shape_id)?,
            assignment: &inst.assignment,
        })
    }

    pub fn shape_of(&self, chair_id: ChairId) -> Option<ShapeId> {
        if chair_id == PLACEHOLDER_CHAIR_ID {
            return Some(PLACEHOLDER_SHAPE_ID);
        }
        self.manifest.instance(chair_id).map(|i| i.shape_id)
    }

    /// Ground-truth attribute vector of a chair, the placeholder included.
    pub fn attributes(&self, chair_id: ChairId) -> Result<AttributeVector> {
        let model = self
            .model(chair_id)
            .ok_or_else(|| Error::NotFound(format!("chair {chair_id}")))?;
        Ok(attribute_vector(model.shape, model.assignment))
    }

    /// One view of a chair drawn alone.
    pub fn snapshot(&self, chair_id: ChairId, view: usize) -> Result<Snapshot> {
        let camera = ViewCamera::fixed(view).ok_or_else(|| Error::invalid(format!("no view {view}")))?;
        let model = self
            .model(chair_id)
            .ok_or_else(|| Error::NotFound(format!("chair {chair_id}")))?;
        Ok(rasterize(&camera, &Sketch::empty(), Some(model)))
    }
}

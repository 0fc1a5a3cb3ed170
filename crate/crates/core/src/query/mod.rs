//! Constrained text queries: normalization, n-gram segmentation and
//! interpretation into attribute-vector updates.

mod interpret;
mod normalize;
mod segment;
mod vector;

pub use interpret::{apply_utterance, interpret, interpret_detailed, polarity_word, Interpretation, Update};
pub use normalize::{normalize, stem_candidates, Normalized, Role, Token, MAX_UTTERANCE_CHARS};
pub use segment::{segment, validate_ngram, QueryChunk, DEFAULT_NGRAM, NGRAM_SIZES};
pub use vector::{
    AttributeVector, SemanticFeatures, COLOR_BLOCK_DIM, SEMANTIC_DIM, SEMANTIC_SCALE,
};

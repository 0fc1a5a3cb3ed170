//! Interactive retrieval of part-colored 3D chairs by constrained text and 3D
//! sketch queries.
//!
//! The crate holds the chair database generator, the text and sketch
//! descriptor pipelines, exact top-k search in both descriptor spaces and the
//! session state machine that chains queries through selections.

pub mod concept;
pub mod dataset;
pub mod dictionary;
pub mod engine;
pub mod error;
pub mod index;
pub mod palette;
pub mod query;
pub mod session;
pub mod sketch;

pub use error::{Error, Result};

//! Greedy grouping of lemmas into n-gram chunks.

use serde::{Deserialize, Serialize};

use super::normalize::{Role, Token};
use crate::error::{Error, Result};

/// Chunk sizes a session may use.
pub const NGRAM_SIZES: [usize; 3] = [2, 4, 6];
pub const DEFAULT_NGRAM: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryChunk {
    pub tokens: Vec<Token>,
}

pub fn validate_ngram(n: usize) -> Result<()> {
    if NGRAM_SIZES.contains(&n) {
        Ok(())
    } else {
        Err(Error::invalid(format!("n-gram size must be 2, 4 or 6, got {n}")))
    }
}

/// Whether `a b` must stay in one chunk.
fn protected(a: &Role, b: &Role) -> bool {
    matches!(
        (a, b),
        (Role::Negation, Role::Concept) | (Role::Color(_), Role::Part(_))
    )
}

/// Packs tokens left to right into chunks of at most `n`, keeping
/// (negation, concept) and (color, part) neighbours together.
pub fn segment(tokens: &[Token], n: usize) -> Result<Vec<QueryChunk>> {
    validate_ngram(n)?;
    let mut units: Vec<&[Token]> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let len = if i + 1 < tokens.len() && protected(&tokens[i].role, &tokens[i + 1].role) {
            2
        } else {
            1
        };
        units.push(&tokens[i..i + len]);
        i += len;
    }
    let mut chunks: Vec<QueryChunk> = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for unit in units {
        if current.len() + unit.len() > n {
            chunks.push(QueryChunk {
                tokens: std::mem::take(&mut current),
            });
        }
        current.extend_from_slice(unit);
    }
    if !current.is_empty() {
        chunks.push(QueryChunk { tokens: current });
    }
    Ok(chunks)
}

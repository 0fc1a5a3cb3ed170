//! Applying chunks of lemmas to a running attribute vector.

use serde::{Deserialize, Serialize};

use super::normalize::{normalize, Role};
use super::segment::{segment, QueryChunk};
use super::vector::AttributeVector;
use crate::concept::Concept;
use crate::dictionary::{Dictionary, Polarity};
use crate::error::Result;
use crate::palette::{ColorId, PartKind};

/// One change applied by an utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Update {
    Color { part: PartKind, color: ColorId },
    Level { concept: Concept, delta: i32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation {
    pub vector: AttributeVector,
    pub updates: Vec<Update>,
    /// Colors that found no part to bind to.
    pub ambiguous_colors: usize,
}

/// Index of the nearest position in `candidates` to `i`; on equal distance
/// the following position wins.
fn nearest(i: usize, candidates: impl Iterator<Item = usize>) -> Option<usize> {
    candidates.min_by_key(|&j| (i.abs_diff(j), j < i))
}

fn chunk_updates(chunk: &QueryChunk, dict: &Dictionary, ambiguous: &mut usize) -> Vec<(usize, Update)> {
    let toks = &chunk.tokens;
    let parts: Vec<(usize, PartKind)> = toks
        .iter()
        .enumerate()
        .filter_map(|(i, t)| match t.role {
            Role::Part(p) => Some((i, p)),
            _ => None,
        })
        .collect();
    let mut out = Vec::new();

    // Colors: adjacent (color, part) pairs bind first, then every remaining
    // color takes the nearest part not yet bound.
    let mut bound = vec![false; toks.len()];
    let mut color_of = vec![None; toks.len()];
    for (i, t) in toks.iter().enumerate() {
        if let (Role::Color(_), Some(Role::Part(_))) = (t.role, toks.get(i + 1).map(|n| n.role)) {
            if !bound[i + 1] {
                bound[i + 1] = true;
                color_of[i] = Some(i + 1);
            }
        }
    }
    for (i, t) in toks.iter().enumerate() {
        if !matches!(t.role, Role::Color(_)) || color_of[i].is_some() {
            continue;
        }
        match nearest(i, parts.iter().map(|&(j, _)| j).filter(|&j| !bound[j])) {
            Some(j) => {
                bound[j] = true;
                color_of[i] = Some(j);
            }
            None => *ambiguous += 1,
        }
    }
    for (i, t) in toks.iter().enumerate() {
        if let (Role::Color(color), Some(j)) = (t.role, color_of[i]) {
            if let Role::Part(part) = toks[j].role {
                out.push((i, Update::Color { part, color }));
            }
        }
    }

    for (i, t) in toks.iter().enumerate() {
        if t.role != Role::Concept {
            continue;
        }
        let senses = dict.senses(&t.lemma);
        let Some(&default) = senses.first() else { continue };
        let (concept, mut polarity) = if senses.len() == 1 {
            default
        } else {
            let scoped = parts
                .iter()
                .filter(|(_, p)| senses.iter().any(|(c, _)| c.scope() == Some(*p)));
            nearest(i, scoped.clone().map(|&(j, _)| j))
                .and_then(|j| {
                    let part = parts.iter().find(|&&(k, _)| k == j)?.1;
                    senses.iter().copied().find(|(c, _)| c.scope() == Some(part))
                })
                .unwrap_or(default)
        };
        if i > 0 && toks[i - 1].role == Role::Negation {
            polarity = polarity.flip();
        }
        out.push((i, Update::Level { concept, delta: polarity.step() }));
    }
    out.sort_by_key(|(i, _)| *i);
    out
}

/// Applies each chunk in order to a copy of `current`.
pub fn interpret_detailed(chunks: &[QueryChunk], current: &AttributeVector, dict: &Dictionary) -> Interpretation {
    let mut vector = *current;
    let mut updates = Vec::new();
    let mut ambiguous = 0;
    for chunk in chunks {
        for (_, u) in chunk_updates(chunk, dict, &mut ambiguous) {
            match u {
                Update::Color { part, color } => vector.set_color(part, Some(color)),
                Update::Level { concept, delta } => vector.step(concept, delta),
            }
            updates.push(u);
        }
    }
    Interpretation {
        vector,
        updates,
        ambiguous_colors: ambiguous,
    }
}

pub fn interpret(chunks: &[QueryChunk], current: &AttributeVector, dict: &Dictionary) -> AttributeVector {
    interpret_detailed(chunks, current, dict).vector
}

/// The whole text pipeline: normalize, segment into `n`-grams, interpret.
pub fn apply_utterance(
    text: &str,
    n: usize,
    current: &AttributeVector,
    dict: &Dictionary,
) -> Result<Interpretation> {
    let normalized = normalize(text, dict);
    let chunks = segment(&normalized.tokens, n)?;
    Ok(interpret_detailed(&chunks, current, dict))
}

/// Convenience used by tests and the simulated users.
pub fn polarity_word(dict: &Dictionary, concept: Concept, delta: i32) -> Option<&str> {
    let polarity = if delta >= 0 { Polarity::Increase } else { Polarity::Decrease };
    dict.concept_word(concept, polarity)
}

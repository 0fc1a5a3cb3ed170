//! Simulated participants: strategies, noise, the time model, and the two
//! per-query behaviors (speaking and sketching).

use chairsearch_core::concept::Concept;
use chairsearch_core::dataset::ChairId;
use chairsearch_core::dictionary::{Dictionary, Polarity};
use chairsearch_core::engine::Engine;
use chairsearch_core::index::ResultSet;
use chairsearch_core::palette::{ColorId, PartKind};
use chairsearch_core::query::AttributeVector;
use chairsearch_core::session::{Mode, Session};
use chairsearch_core::sketch::Sketch;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::silhouette::SilhouetteLibrary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    VoicePure,
    SketchPure,
    /// Sketch until the shape is found, then speak the colors.
    HybridA,
    /// One sketch, select, then speak refinements and colors.
    HybridB,
    /// Speak the shape, sketch over the selection, then speak the colors.
    HybridC,
    /// Rotates through A, B and C by trial index.
    Hybrid,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::VoicePure,
        Strategy::SketchPure,
        Strategy::HybridA,
        Strategy::HybridB,
        Strategy::HybridC,
        Strategy::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::VoicePure => "voice_pure",
            Strategy::SketchPure => "sketch_pure",
            Strategy::HybridA => "hybrid_a",
            Strategy::HybridB => "hybrid_b",
            Strategy::HybridC => "hybrid_c",
            Strategy::Hybrid => "hybrid",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Strategy::VoicePure => Mode::VoiceOnly,
            Strategy::SketchPure => Mode::SketchOnly,
            _ => Mode::Hybrid,
        }
    }

    /// The concrete strategy used for trial `trial`.
    pub fn resolve(self, trial: usize) -> Strategy {
        match self {
            Strategy::Hybrid => [Strategy::HybridA, Strategy::HybridB, Strategy::HybridC][trial % 3],
            s => s,
        }
    }

    pub(crate) fn code(self) -> u64 {
        self as u64
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    /// Probability that a spoken content word is swapped for a random word
    /// of the same role.
    pub p_c: f64,
    /// Probability that a part is sketched in the color of another part.
    pub p_m: f64,
}

impl Noise {
    pub const NONE: Noise = Noise { p_c: 0.0, p_m: 0.0 };

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_c", self.p_c), ("p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

impl Default for Noise {
    fn default() -> Self {
        Noise { p_c: 0.5, p_m: 0.85 }
    }
}

/// Simulated cost of each user action, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeModel {
    pub voice_ms: u64,
    pub sketch_base_ms: u64,
    pub sketch_per_stroke_ms: u64,
    pub selection_ms: u64,
    pub processing_ms: u64,
}

impl Default for TimeModel {
    fn default() -> Self {
        TimeModel {
            voice_ms: 10_000,
            sketch_base_ms: 2_000,
            sketch_per_stroke_ms: 500,
            selection_ms: 3_000,
            processing_ms: 1_000,
        }
    }
}

impl TimeModel {
    pub fn sketch_ms(&self, strokes: usize) -> u64 {
        self.sketch_base_ms + self.sketch_per_stroke_ms * strokes as u64
    }
}

/// One spoken instruction: content lemmas in utterance order.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Phrase {
    words: Vec<Lemma>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Lemma {
    Color(ColorId),
    Part(PartKind),
    Concept(Concept, Polarity),
}

fn color_phrases(current: &AttributeVector, target: &AttributeVector) -> Vec<Phrase> {
    PartKind::ALL
        .into_iter()
        .filter_map(|p| {
            let c = target.color(p)?;
            (current.color(p) != Some(c)).then(|| Phrase {
                words: vec![Lemma::Color(c), Lemma::Part(p)],
            })
        })
        .collect()
}

/// One phrase per level step, larger gaps first.
fn concept_phrases(current: &AttributeVector, target: &AttributeVector) -> Vec<Phrase> {
    let mut gaps: Vec<(Concept, i32)> = Concept::ALL
        .into_iter()
        .map(|k| (k, target.level(k) as i32 - current.level(k) as i32))
        .filter(|&(_, g)| g != 0)
        .collect();
    gaps.sort_by_key(|&(k, g)| (std::cmp::Reverse(g.abs()), k));
    let mut out = Vec::new();
    // Interleave steps so a short utterance spreads over several concepts.
    let max = gaps.first().map_or(0, |&(_, g)| g.abs());
    for round in 0..max {
        for &(k, g) in &gaps {
            if g.abs() > round {
                let pol = if g > 0 { Polarity::Increase } else { Polarity::Decrease };
                let mut words = vec![Lemma::Concept(k, pol)];
                if let Some(p) = k.scope() {
                    words.push(Lemma::Part(p));
                }
                out.push(Phrase { words });
            }
        }
    }
    out
}

fn render(dict: &Dictionary, lemma: Lemma) -> &str {
    match lemma {
        Lemma::Color(c) => dict.color_lemma(c),
        Lemma::Part(p) => dict.part_lemma(p),
        Lemma::Concept(k, pol) => dict
            .concept_word(k, pol)
            .or_else(|| dict.concept_word(k, Polarity::Increase))
            .expect("every concept has a lemma"),
    }
}

fn corrupt<R: Rng>(lemma: Lemma, rng: &mut R) -> Lemma {
    match lemma {
        Lemma::Color(c) => {
            let others: Vec<ColorId> = ColorId::ALL.into_iter().filter(|&o| o != c).collect();
            Lemma::Color(*others.choose(rng).expect("six colors"))
        }
        Lemma::Part(p) => {
            let others: Vec<PartKind> = PartKind::ALL.into_iter().filter(|&o| o != p).collect();
            Lemma::Part(*others.choose(rng).expect("four parts"))
        }
        Lemma::Concept(k, pol) => loop {
            let other = Concept::ALL[rng.random_range(0..Concept::COUNT)];
            let other_pol = if rng.random_bool(0.5) { Polarity::Increase } else { Polarity::Decrease };
            if (other, other_pol) != (k, pol) {
                break Lemma::Concept(other, other_pol);
            }
        },
    }
}

/// Utterance describing the largest current-vs-target differences in at most
/// `n_gram` content words, each word corrupted with probability `p_c`.
///
/// With the shape already found only colors are mentioned; otherwise shape
/// steps come first. `shuffle` reorders the candidate phrases, which a stuck
/// user does to try a different description.
pub fn describe_differences<R: Rng>(
    dict: &Dictionary,
    current: &AttributeVector,
    target: &AttributeVector,
    shape_matched: bool,
    n_gram: usize,
    p_c: f64,
    shuffle: bool,
    rng: &mut R,
) -> String {
    let mut concepts = concept_phrases(current, target);
    if shuffle {
        concepts.shuffle(rng);
    }
    let colors = color_phrases(current, target);
    let phrases: Vec<Phrase> = if shape_matched {
        colors
    } else {
        concepts.into_iter().chain(colors).collect()
    };
    let mut words: Vec<Lemma> = Vec::new();
    for p in phrases {
        if words.len() + p.words.len() <= n_gram {
            words.extend(p.words);
        }
    }
    let mut text: Vec<&str> = Vec::with_capacity(words.len() + 1);
    for w in words {
        let w = if rng.random_bool(p_c) { corrupt(w, rng) } else { w };
        text.push(render(dict, w));
    }
    text.push(&dict.terminator);
    text.join(" ")
}

/// Whether the session's current chair already has the target's shape.
pub fn shape_matched(engine: &Engine, current: ChairId, target: ChairId) -> bool {
    engine.shape_of(current).is_some() && engine.shape_of(current) == engine.shape_of(target)
}

/// Speaks about the session's running descriptor.
pub fn voice_user_step<R: Rng>(
    target: ChairId,
    session: &Session,
    n_gram: usize,
    p_c: f64,
    stalled: bool,
    rng: &mut R,
) -> Result<String> {
    let engine = session.engine();
    let t = engine.attributes(target)?;
    let matched = shape_matched(engine, session.current(), target);
    Ok(describe_differences(
        engine.dictionary(),
        session.descriptor(),
        &t,
        matched,
        n_gram,
        p_c,
        stalled,
        rng,
    ))
}

/// Traces the target's silhouette, each part colored with its own color or,
/// with probability `p_m`, with another part's color. Sketches over the
/// current chair once it has the target's shape.
pub fn sketch_user_step<R: Rng>(
    target: ChairId,
    session: &Session,
    library: &SilhouetteLibrary,
    p_m: f64,
    rng: &mut R,
) -> Result<(Sketch, bool)> {
    let engine = session.engine();
    let inst = engine
        .manifest()
        .instance(target)
        .ok_or(SimError::UnknownTarget(target))?;
    let silhouette = library.get(inst.shape_id)?;
    let parts: Vec<PartKind> = inst.assignment.parts().collect();
    let mut colors = [None; PartKind::COUNT];
    for &p in &parts {
        let own = inst.assignment.color(p).expect("assigned part");
        let others: Vec<PartKind> = parts.iter().copied().filter(|&o| o != p).collect();
        let c = if !others.is_empty() && rng.random_bool(p_m) {
            let o = *others.choose(rng).expect("non-empty");
            inst.assignment.color(o).expect("assigned part")
        } else {
            own
        };
        colors[p.code()] = Some(c);
    }
    let sketch = silhouette.sketch(|p| colors[p.code()].unwrap_or(ColorId::Red))?;
    Ok((sketch, shape_matched(engine, session.current(), target)))
}

/// The result a participant clicks: the target's shape if visible, then the
/// chair that looks closest to the target, then the higher-ranked one.
pub fn choose_result(engine: &Engine, results: &ResultSet, target: ChairId) -> Result<usize> {
    let t = engine.attributes(target)?;
    let target_shape = engine.shape_of(target);
    let mut best: Option<((bool, u32, usize), usize)> = None;
    for (rank, n) in results.neighbors.iter().enumerate() {
        let key = (
            engine.shape_of(n.chair_id) != target_shape,
            engine.attributes(n.chair_id)?.distance_sq_scaled(&t),
            rank,
        );
        if best.is_none_or(|(b, _)| key < b) {
            best = Some((key, rank));
        }
    }
    best.map(|(_, r)| r)
        .ok_or_else(|| SimError::Config("empty result set".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chairsearch_core::query::apply_utterance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(levels: [u8; 20], colors: [Option<ColorId>; 4]) -> AttributeVector {
        let mut a = AttributeVector::neutral();
        a.levels = levels;
        a.colors = colors;
        a
    }

    #[test]
    fn matched_shape_mentions_only_colors() {
        let d = Dictionary::builtin();
        let cur = v([2; 20], [None, Some(ColorId::Red), Some(ColorId::Red), Some(ColorId::Red)]);
        let mut tgt = cur;
        tgt.colors = [None, Some(ColorId::Blue), Some(ColorId::Green), Some(ColorId::Cyan)];
        tgt.levels[3] = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let text = describe_differences(&d, &cur, &tgt, true, 6, 0.0, false, &mut rng);
        assert_eq!(text, "blue back green seat cyan legs stop");
    }

    #[test]
    fn word_budget_is_respected_and_moves_toward_target() {
        let d = Dictionary::builtin();
        let cur = v([0; 20], [None; 4]);
        let tgt = v([4; 20], [Some(ColorId::Red), Some(ColorId::Blue), Some(ColorId::Green), Some(ColorId::Cyan)]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [2, 4, 6] {
            let text = describe_differences(&d, &cur, &tgt, false, n, 0.0, false, &mut rng);
            let norm = chairsearch_core::query::normalize(&text, &d);
            assert!(norm.tokens.len() <= n, "{text}");
            let next = apply_utterance(&text, n, &cur, &d).unwrap().vector;
            assert!(next.distance(&tgt) < cur.distance(&tgt), "{text}");
        }
    }

    #[test]
    fn full_noise_changes_words() {
        let d = Dictionary::builtin();
        let cur = v([2; 20], [None; 4]);
        let tgt = v([2; 20], [None, Some(ColorId::Red), None, None]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let text = describe_differences(&d, &cur, &tgt, true, 6, 1.0, false, &mut rng);
            assert_ne!(text, "red back stop");
        }
    }

    #[test]
    fn noise_bounds_are_checked() {
        assert!(Noise { p_c: 1.2, p_m: 0.0 }.validate().is_err());
        assert!(Noise::default().validate().is_ok());
    }

    #[test]
    fn hybrid_rotates_concrete_strategies() {
        let r: Vec<_> = (0..4).map(|t| Strategy::Hybrid.resolve(t)).collect();
        assert_eq!(r, [Strategy::HybridA, Strategy::HybridB, Strategy::HybridC, Strategy::HybridA]);
        assert_eq!(Strategy::HybridB.mode(), Mode::Hybrid);
    }
}

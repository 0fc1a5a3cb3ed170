//! The constrained query vocabulary: color, part and concept lemmas with
//! synonyms and antonyms, stop-words, negations and the terminator.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::concept::Concept;
use crate::error::{Error, Result};
use crate::palette::{ColorId, PartKind};

pub const DICTIONARY_VERSION: u32 = 1;
const DEFAULT_DICTIONARY: &str = include_str!("../assets/dictionary.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorEntry {
    pub color: ColorId,
    /// First entry is canonical.
    pub lemmas: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartEntry {
    pub part: PartKind,
    /// First entry is canonical.
    pub lemmas: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptEntry {
    pub concept: Concept,
    pub lemma: String,
    pub synonyms: Vec<String>,
    /// First entry is the canonical antonym.
    pub antonyms: Vec<String>,
}

/// Direction a concept word pushes its level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Increase,
    Decrease,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Increase => Polarity::Decrease,
            Polarity::Decrease => Polarity::Increase,
        }
    }

    pub fn step(self) -> i32 {
        match self {
            Polarity::Increase => 1,
            Polarity::Decrease => -1,
        }
    }
}

/// What a surface word means once looked up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lexeme {
    Terminator,
    Negation,
    Stop,
    Color { color: ColorId, canonical: String },
    Part { part: PartKind, canonical: String },
    Concept { canonical: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dictionary {
    pub version: u32,
    pub checksum: String,
    pub terminator: String,
    pub negations: Vec<String>,
    pub stopwords: Vec<String>,
    pub colors: Vec<ColorEntry>,
    pub parts: Vec<PartEntry>,
    pub concepts: Vec<ConceptEntry>,
    #[serde(skip)]
    words: HashMap<String, Lexeme>,
    /// Canonical concept word -> concepts it can denote, in file order.
    #[serde(skip)]
    senses: HashMap<String, Vec<(Concept, Polarity)>>,
}

impl PartialEq for Dictionary {
    fn eq(&self, other: &Self) -> bool {
        self.checksum == other.checksum && self.canonical_json() == other.canonical_json()
    }
}

#[derive(Serialize)]
struct CanonicalForm<'a> {
    version: u32,
    terminator: &'a str,
    negations: &'a [String],
    stopwords: &'a [String],
    colors: &'a [ColorEntry],
    parts: &'a [PartEntry],
    concepts: &'a [ConceptEntry],
}

impl Dictionary {
    /// The vocabulary shipped with the crate.
    pub fn builtin() -> Dictionary {
        Self::from_toml(DEFAULT_DICTIONARY).expect("bundled dictionary is valid")
    }

    pub fn load(path: &Path) -> Result<Dictionary> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    /// Parses and validates a dictionary document, including its checksum.
    pub fn from_toml(text: &str) -> Result<Dictionary> {
        let dict = Self::from_toml_unchecked(text)?;
        let actual = dict.compute_checksum();
        if actual != dict.checksum {
            return Err(Error::ChecksumMismatch {
                what: "dictionary",
                expected: dict.checksum.clone(),
                found: actual,
            });
        }
        Ok(dict)
    }

    /// Parses and validates everything except the stored checksum.
    pub fn from_toml_unchecked(text: &str) -> Result<Dictionary> {
        let mut dict: Dictionary = toml::from_str(text)?;
        if dict.version != DICTIONARY_VERSION {
            return Err(Error::VersionMismatch {
                expected: DICTIONARY_VERSION.to_string(),
                found: dict.version.to_string(),
            });
        }
        dict.index()?;
        Ok(dict)
    }

    fn canonical_json(&self) -> String {
        serde_json::to_string(&CanonicalForm {
            version: self.version,
            terminator: &self.terminator,
            negations: &self.negations,
            stopwords: &self.stopwords,
            colors: &self.colors,
            parts: &self.parts,
            concepts: &self.concepts,
        })
        .expect("serializable")
    }

    pub fn compute_checksum(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    fn index(&mut self) -> Result<()> {
        let colors: BTreeSet<ColorId> = self.colors.iter().map(|e| e.color).collect();
        if colors.len() != ColorId::COUNT || self.colors.len() != ColorId::COUNT {
            return Err(Error::invalid("dictionary must list each of the 6 colors once"));
        }
        let parts: BTreeSet<PartKind> = self.parts.iter().map(|e| e.part).collect();
        if parts.len() != PartKind::COUNT || self.parts.len() != PartKind::COUNT {
            return Err(Error::invalid("dictionary must list each of the 4 parts once"));
        }
        let concepts: BTreeSet<Concept> = self.concepts.iter().map(|e| e.concept).collect();
        if concepts.len() != Concept::COUNT || self.concepts.len() != Concept::COUNT {
            return Err(Error::invalid("dictionary must list each of the 20 concepts once"));
        }

        let mut words: HashMap<String, Lexeme> = HashMap::new();
        let mut insert = |word: &str, lex: Lexeme| -> Result<()> {
            if word.is_empty() || word.chars().any(|c| !c.is_alphanumeric()) || word != word.to_lowercase() {
                return Err(Error::invalid(format!("`{word}` is not a lowercase word")));
            }
            match words.get(word) {
                Some(existing) if *existing != lex => Err(Error::invalid(format!(
                    "`{word}` has two meanings: {existing:?} and {lex:?}"
                ))),
                _ => {
                    words.insert(word.to_string(), lex);
                    Ok(())
                }
            }
        };
        insert(&self.terminator, Lexeme::Terminator)?;
        for w in &self.negations {
            insert(w, Lexeme::Negation)?;
        }
        for w in &self.stopwords {
            insert(w, Lexeme::Stop)?;
        }
        for e in &self.colors {
            let canonical = e.lemmas.first().ok_or_else(|| Error::invalid("color without lemmas"))?;
            for w in &e.lemmas {
                insert(w, Lexeme::Color { color: e.color, canonical: canonical.clone() })?;
            }
        }
        for e in &self.parts {
            let canonical = e.parts_canonical()?;
            for w in &e.lemmas {
                insert(w, Lexeme::Part { part: e.part, canonical: canonical.clone() })?;
            }
        }
        let mut senses: HashMap<String, Vec<(Concept, Polarity)>> = HashMap::new();
        for e in &self.concepts {
            let antonym = e.antonyms.first();
            for w in std::iter::once(&e.lemma).chain(&e.synonyms) {
                insert(w, Lexeme::Concept { canonical: e.lemma.clone() })?;
            }
            for w in &e.antonyms {
                insert(w, Lexeme::Concept { canonical: antonym.cloned().unwrap_or_default() })?;
            }
            let mut add_sense = |canonical: &str, pol: Polarity| -> Result<()> {
                let list = senses.entry(canonical.to_string()).or_default();
                if list.iter().any(|(c, _)| c.scope() == e.concept.scope()) {
                    return Err(Error::invalid(format!(
                        "`{canonical}` denotes two concepts with the same part scope"
                    )));
                }
                list.push((e.concept, pol));
                Ok(())
            };
            add_sense(&e.lemma, Polarity::Increase)?;
            if let Some(a) = antonym {
                add_sense(a, Polarity::Decrease)?;
            }
        }
        self.words = words;
        self.senses = senses;
        Ok(())
    }

    /// Exact lookup of a lowercase surface word.
    pub fn lookup(&self, word: &str) -> Option<&Lexeme> {
        self.words.get(word)
    }

    /// Concepts a canonical concept word can denote, default sense first.
    pub fn senses(&self, canonical: &str) -> &[(Concept, Polarity)] {
        self.senses.get(canonical).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn concept_entry(&self, concept: Concept) -> &ConceptEntry {
        self.concepts
            .iter()
            .find(|e| e.concept == concept)
            .expect("validated: every concept present")
    }

    pub fn color_lemma(&self, color: ColorId) -> &str {
        &self.colors.iter().find(|e| e.color == color).expect("validated").lemmas[0]
    }

    pub fn part_lemma(&self, part: PartKind) -> &str {
        &self.parts.iter().find(|e| e.part == part).expect("validated").lemmas[0]
    }

    /// Canonical word that moves `concept` in direction `polarity`, if any.
    pub fn concept_word(&self, concept: Concept, polarity: Polarity) -> Option<&str> {
        let e = self.concept_entry(concept);
        match polarity {
            Polarity::Increase => Some(e.lemma.as_str()),
            Polarity::Decrease => e.antonyms.first().map(String::as_str),
        }
    }

    /// Re-serializes the dictionary with a freshly computed checksum.
    pub fn to_toml(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.checksum = self.compute_checksum();
        toml::to_string(&copy).map_err(|e| Error::Format(e.to_string()))
    }
}

impl PartEntry {
    fn parts_canonical(&self) -> Result<String> {
        self.lemmas
            .first()
            .cloned()
            .ok_or_else(|| Error::invalid("part without lemmas"))
    }
}

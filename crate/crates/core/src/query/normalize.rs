//! Tokenization, cleaning and suffix stripping of raw utterance text.

use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, Lexeme};
use crate::palette::{ColorId, PartKind};

/// Longest utterance considered, in characters. Anything after is ignored.
pub const MAX_UTTERANCE_CHARS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Part(PartKind),
    Color(ColorId),
    Concept,
    Negation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub lemma: String,
    pub role: Role,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Normalized {
    pub tokens: Vec<Token>,
    /// Words that matched nothing in the dictionary, in order.
    pub unknown: Vec<String>,
    /// Whether the terminator was seen.
    pub terminated: bool,
    /// Whether the character cap cut the text.
    pub truncated: bool,
}

/// Cuts `text` to [`MAX_UTTERANCE_CHARS`] without leaving a partial word.
fn cap_length(text: &str) -> (&str, bool) {
    let Some((cut, _)) = text.char_indices().nth(MAX_UTTERANCE_CHARS) else {
        return (text, false);
    };
    let head = &text[..cut];
    let next_is_word = text[cut..].chars().next().is_some_and(char::is_alphanumeric);
    if next_is_word {
        let start = head
            .char_indices()
            .rev()
            .take_while(|(_, c)| c.is_alphanumeric())
            .last()
            .map_or(cut, |(i, _)| i);
        (&head[..start], true)
    } else {
        (head, true)
    }
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '\u{2019}'))
        .map(|w| {
            w.chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|w| !w.is_empty())
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// "thinn" -> "thin", "bigg" -> "big".
fn undouble(stem: &str) -> Option<String> {
    let mut cs = stem.chars().rev();
    let (a, b) = (cs.next()?, cs.next()?);
    (a == b && !is_vowel(a) && a.is_alphabetic()).then(|| stem[..stem.len() - a.len_utf8()].to_string())
}

/// Candidate lemmas for an inflected word, most specific rule first:
/// `-iest/-ier/-ies -> -y`, `-est`, `-er`, `-ing`, `-ed`, `-es`, `-s`, each
/// also tried with a restored final `e` and with an undoubled final consonant.
pub fn stem_candidates(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    for suffix in ["iest", "ier", "ies"] {
        if let Some(stem) = word.strip_suffix(suffix) {
            if !stem.is_empty() {
                out.push(format!("{stem}y"));
            }
        }
    }
    for suffix in ["est", "er", "ing", "ed"] {
        if let Some(stem) = word.strip_suffix(suffix) {
            if stem.chars().count() < 2 {
                continue;
            }
            out.push(stem.to_string());
            out.push(format!("{stem}e"));
            out.extend(undouble(stem));
        }
    }
    if let Some(stem) = word.strip_suffix("es") {
        if stem.chars().count() >= 2 {
            out.push(stem.to_string());
        }
    }
    if let Some(stem) = word.strip_suffix('s') {
        if !stem.is_empty() && !stem.ends_with('s') {
            out.push(stem.to_string());
        }
    }
    out
}

fn resolve<'d>(dict: &'d Dictionary, word: &str) -> Option<&'d Lexeme> {
    if let Some(lex) = dict.lookup(word) {
        return Some(lex);
    }
    stem_candidates(word).iter().find_map(|cand| {
        dict.lookup(cand)
            .filter(|lex| !matches!(lex, Lexeme::Terminator | Lexeme::Negation))
    })
}

/// Turns raw text into role-tagged lemmas. Never fails: unknown words are
/// dropped and reported, everything from the terminator on is ignored.
pub fn normalize(text: &str, dict: &Dictionary) -> Normalized {
    let (text, truncated) = cap_length(text);
    let mut out = Normalized {
        truncated,
        ..Normalized::default()
    };
    for word in words(text) {
        match resolve(dict, &word) {
            Some(Lexeme::Terminator) => {
                out.terminated = true;
                break;
            }
            Some(Lexeme::Stop) => {}
            Some(Lexeme::Negation) => out.tokens.push(Token {
                lemma: word,
                role: Role::Negation,
            }),
            Some(Lexeme::Color { color, canonical }) => out.tokens.push(Token {
                lemma: canonical.clone(),
                role: Role::Color(*color),
            }),
            Some(Lexeme::Part { part, canonical }) => out.tokens.push(Token {
                lemma: canonical.clone(),
                role: Role::Part(*part),
            }),
            Some(Lexeme::Concept { canonical }) => out.tokens.push(Token {
                lemma: canonical.clone(),
                role: Role::Concept,
            }),
            None => out.unknown.push(word),
        }
    }
    out
}

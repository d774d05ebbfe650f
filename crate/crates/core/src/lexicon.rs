//! Typed adjective/noun lexicon.
//!
//! The on-disk format is one record per line, `surface<TAB>category`, where
//! category is one of `S-I`, `S-NI`, `NS-PL`, `NS-PR`, `AMB` for adjectives
//! or `NOUN` for nouns. Blank lines and lines starting with `#` are ignored.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

const DEFAULT_LEXICON: &str = include_str!("../data/default_lexicon.tsv");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("invalid lexicon: {message} ({surface:?})")]
    Validation { surface: String, message: String },
    #[error("invalid lexicon: {0}")]
    Empty(&'static str),
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

/// Adjective categories, in the canonical column order used by every table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AdjectiveType {
    SubsectiveIntersective,
    SubsectiveNonIntersective,
    NonSubsectivePlain,
    NonSubsectivePrivative,
    Ambiguous,
}

impl AdjectiveType {
    pub const ALL: [AdjectiveType; 5] = [
        AdjectiveType::SubsectiveIntersective,
        AdjectiveType::SubsectiveNonIntersective,
        AdjectiveType::NonSubsectivePlain,
        AdjectiveType::NonSubsectivePrivative,
        AdjectiveType::Ambiguous,
    ];

    /// Category code used in lexicon files.
    pub fn file_code(self) -> &'static str {
        match self {
            AdjectiveType::SubsectiveIntersective => "S-I",
            AdjectiveType::SubsectiveNonIntersective => "S-NI",
            AdjectiveType::NonSubsectivePlain => "NS-PL",
            AdjectiveType::NonSubsectivePrivative => "NS-PR",
            AdjectiveType::Ambiguous => "AMB",
        }
    }

    /// Short label used in rendered tables.
    pub fn short_label(self) -> &'static str {
        match self {
            AdjectiveType::SubsectiveIntersective => "S-I",
            AdjectiveType::SubsectiveNonIntersective => "S-NI",
            AdjectiveType::NonSubsectivePlain => "NS-Pl",
            AdjectiveType::NonSubsectivePrivative => "NS-Pr",
            AdjectiveType::Ambiguous => "A",
        }
    }

    pub fn from_short_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.short_label() == label)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AdjectiveType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_label())
    }
}

impl FromStr for AdjectiveType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.file_code() == s)
            .ok_or_else(|| format!("unknown adjective category {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Adjective {
    pub surface: String,
    pub kind: AdjectiveType,
}

/// Validated lexicon. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    adjectives: Vec<Adjective>,
    nouns: Vec<String>,
}

fn check_surface(surface: &str) -> Result<(), LexiconError> {
    if surface.is_empty() || surface.chars().any(char::is_whitespace) {
        return Err(LexiconError::Validation {
            surface: surface.to_string(),
            message: "surface must be a single whitespace-free token".into(),
        });
    }
    if surface.starts_with('#') {
        return Err(LexiconError::Validation {
            surface: surface.to_string(),
            message: "surface cannot start with `#` (reads back as a comment)".into(),
        });
    }
    Ok(())
}

impl Lexicon {
    /// Builds a lexicon, enforcing the uniqueness and token invariants.
    /// Empty lists are allowed here; [`load_lexicon`] rejects them.
    pub fn new(adjectives: Vec<Adjective>, nouns: Vec<String>) -> Result<Self, LexiconError> {
        let mut seen_adj = HashSet::new();
        for adj in &adjectives {
            check_surface(&adj.surface)?;
            if !seen_adj.insert(adj.surface.as_str()) {
                return Err(LexiconError::Validation {
                    surface: adj.surface.clone(),
                    message: "duplicate adjective".into(),
                });
            }
        }
        let mut seen_noun = HashSet::new();
        for noun in &nouns {
            check_surface(noun)?;
            if !seen_noun.insert(noun.as_str()) {
                return Err(LexiconError::Validation {
                    surface: noun.clone(),
                    message: "duplicate noun".into(),
                });
            }
            if seen_adj.contains(noun.as_str()) {
                return Err(LexiconError::Validation {
                    surface: noun.clone(),
                    message: "surface listed as both adjective and noun".into(),
                });
            }
        }
        Ok(Self { adjectives, nouns })
    }

    /// The bundled 61-adjective, 12-noun dataset.
    pub fn bundled() -> Self {
        parse_lexicon(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn adjectives(&self) -> &[Adjective] {
        &self.adjectives
    }

    pub fn nouns(&self) -> &[String] {
        &self.nouns
    }

    pub fn adjective(&self, surface: &str) -> Option<&Adjective> {
        self.adjectives.iter().find(|a| a.surface == surface)
    }

    pub fn count_by_type(&self) -> BTreeMap<AdjectiveType, usize> {
        let mut counts: BTreeMap<_, _> = AdjectiveType::ALL.iter().map(|&t| (t, 0)).collect();
        for adj in &self.adjectives {
            *counts.entry(adj.kind).or_default() += 1;
        }
        counts
    }

    pub fn adjectives_of_type(&self, kind: AdjectiveType) -> Vec<&str> {
        self.adjectives
            .iter()
            .filter(|a| a.kind == kind)
            .map(|a| a.surface.as_str())
            .collect()
    }

    /// Serializes to the lexicon file format. Adjectives come first, then nouns,
    /// each in source order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for adj in &self.adjectives {
            out.push_str(&adj.surface);
            out.push('\t');
            out.push_str(adj.kind.file_code());
            out.push('\n');
        }
        for noun in &self.nouns {
            out.push_str(noun);
            out.push_str("\tNOUN\n");
        }
        out
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_tsv().as_bytes()))
    }
}

/// Parses and validates a lexicon document. Both sections must be nonempty.
pub fn parse_lexicon(source: &str) -> Result<Lexicon, LexiconError> {
    let mut adjectives = Vec::new();
    let mut nouns = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (surface, category) = match (fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(c), None) => (s, c.trim()),
            _ => {
                return Err(LexiconError::Format {
                    line: line_no,
                    message: "expected `surface<TAB>category`".into(),
                })
            }
        };
        if category == "NOUN" {
            nouns.push(surface.to_string());
        } else {
            let kind = category.parse().map_err(|message| LexiconError::Format {
                line: line_no,
                message,
            })?;
            adjectives.push(Adjective {
                surface: surface.to_string(),
                kind,
            });
        }
    }
    if adjectives.is_empty() {
        return Err(LexiconError::Empty("no adjectives (empty alphabet)"));
    }
    if nouns.is_empty() {
        return Err(LexiconError::Empty("no nouns (empty alphabet)"));
    }
    Lexicon::new(adjectives, nouns)
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
    parse_lexicon(&std::fs::read_to_string(path)?)
}

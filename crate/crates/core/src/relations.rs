//! Metamorphic relations over embeddings and their aggregation into
//! consistency rates.
//!
//! * Intersectivity: for a phrase `p` with terms `t_1..t_n`,
//!   `max_i d(p, t_i) <= min_{j<k} d(t_j, t_k)`.
//! * Pair intersectivity: for adjectives `a1 != a2` and nouns `n1 != n2`,
//!   `d(a1 n1, a1 n2) < d(a2 n1, a2 n2)` (strict).
//! * Non-subsectivity: for an AN phrase, `d(p, a) <= d(p, n)`.
//!
//! Margins are "right side minus left side". A margin whose magnitude is at
//! most [`TIE_EPSILON`] is snapped to exactly zero, so algebraic ties are not
//! decided by floating-point rounding.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::EmbeddingLookup;
use crate::exec::Execution;
use crate::geometry::{cosine_distance, EmbeddingVector, GeometryError};
use crate::lexicon::AdjectiveType;
use crate::phrasegen::{PairQuadruple, Phrase};

pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum RelationError {
    #[error("no embedding for {0:?}")]
    Missing(String),
    #[error("distance involving {text:?}: {source}")]
    Geometry {
        text: String,
        #[source]
        source: GeometryError,
    },
    #[error("{0}")]
    Contract(String),
    #[error("cannot group outcome {input:?}: {reason}")]
    Grouping { input: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationId {
    Intersectivity,
    PairIntersectivity,
    NonSubsectivity,
}

impl RelationId {
    pub fn is_strict(self) -> bool {
        self == RelationId::PairIntersectivity
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationId::Intersectivity => "intersectivity",
            RelationId::PairIntersectivity => "pair_intersectivity",
            RelationId::NonSubsectivity => "non_subsectivity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationOutcome {
    pub relation: RelationId,
    /// Phrase text, or `a1|a2|n1|n2` for pair quadruples.
    pub input: String,
    /// Adjective types in phrase order (or `[type(a1), type(a2)]`).
    pub types: Vec<AdjectiveType>,
    pub satisfied: bool,
    pub margin: f64,
}

impl RelationOutcome {
    fn new(relation: RelationId, input: String, types: Vec<AdjectiveType>, margin: f64) -> Self {
        let margin = if margin.abs() <= TIE_EPSILON {
            0.0
        } else {
            margin
        };
        let satisfied = if relation.is_strict() {
            margin > 0.0
        } else {
            margin >= 0.0
        };
        Self {
            relation,
            input,
            types,
            satisfied,
            margin,
        }
    }

    pub fn is_tie(&self) -> bool {
        self.margin == 0.0
    }
}

fn lookup<'a, L: EmbeddingLookup + ?Sized>(
    emb: &'a L,
    text: &str,
) -> Result<&'a EmbeddingVector, RelationError> {
    emb.vector(text)
        .ok_or_else(|| RelationError::Missing(text.to_string()))
}

fn distance(
    a: (&str, &EmbeddingVector),
    b: (&str, &EmbeddingVector),
) -> Result<f64, RelationError> {
    cosine_distance(a.1, b.1).map_err(|source| RelationError::Geometry {
        text: if b.1.is_zero() { b.0 } else { a.0 }.to_string(),
        source,
    })
}

/// Intersectivity for a phrase of any length. For AN phrases this is
/// `d(P,A) <= d(A,N) && d(P,N) <= d(A,N)`.
pub fn eval_intersectivity<L: EmbeddingLookup + ?Sized>(
    phrase: &Phrase,
    emb: &L,
) -> Result<RelationOutcome, RelationError> {
    let p = (phrase.text(), lookup(emb, phrase.text())?);
    let terms = phrase
        .terms()
        .iter()
        .map(|t| Ok((t.surface.as_str(), lookup(emb, &t.surface)?)))
        .collect::<Result<Vec<_>, RelationError>>()?;

    let mut max_to_phrase = f64::NEG_INFINITY;
    for &t in &terms {
        max_to_phrase = max_to_phrase.max(distance(p, t)?);
    }
    let mut min_between_terms = f64::INFINITY;
    for j in 0..terms.len() {
        for k in j + 1..terms.len() {
            min_between_terms = min_between_terms.min(distance(terms[j], terms[k])?);
        }
    }
    Ok(RelationOutcome::new(
        RelationId::Intersectivity,
        phrase.text().to_string(),
        phrase.adjective_types(),
        min_between_terms - max_to_phrase,
    ))
}

/// `d(a1 n1, a1 n2) < d(a2 n1, a2 n2)`.
pub fn eval_pair_intersectivity<L: EmbeddingLookup + ?Sized>(
    quad: &PairQuadruple<'_>,
    emb: &L,
) -> Result<RelationOutcome, RelationError> {
    let [a1n1, a1n2, a2n1, a2n2] = quad.phrase_texts();
    let v = |t: &str| lookup(emb, t);
    let left = distance((&a1n1, v(&a1n1)?), (&a1n2, v(&a1n2)?))?;
    let right = distance((&a2n1, v(&a2n1)?), (&a2n2, v(&a2n2)?))?;
    Ok(RelationOutcome::new(
        RelationId::PairIntersectivity,
        quad.key(),
        vec![quad.a1.kind, quad.a2.kind],
        right - left,
    ))
}

/// `d(p, a) <= d(p, n)` for a single-adjective phrase.
pub fn eval_nonsubsectivity<L: EmbeddingLookup + ?Sized>(
    phrase: &Phrase,
    emb: &L,
) -> Result<RelationOutcome, RelationError> {
    if phrase.adjective_count() != 1 {
        return Err(RelationError::Contract(format!(
            "non-subsectivity needs exactly one adjective, {:?} has {}",
            phrase.text(),
            phrase.adjective_count()
        )));
    }
    let [adj, noun] = phrase.terms() else {
        unreachable!("one adjective plus one noun")
    };
    let p = (phrase.text(), lookup(emb, phrase.text())?);
    let a = (adj.surface.as_str(), lookup(emb, &adj.surface)?);
    let n = (noun.surface.as_str(), lookup(emb, &noun.surface)?);
    let to_adj = distance(p, a)?;
    let to_noun = distance(p, n)?;
    Ok(RelationOutcome::new(
        RelationId::NonSubsectivity,
        phrase.text().to_string(),
        phrase.adjective_types(),
        to_noun - to_adj,
    ))
}

pub fn evaluate_intersectivity<L: EmbeddingLookup + ?Sized + Sync>(
    phrases: &[Phrase],
    emb: &L,
    exec: Execution,
) -> Result<Vec<RelationOutcome>, RelationError> {
    exec.try_map(phrases, |p| eval_intersectivity(p, emb))
}

pub fn evaluate_pair_intersectivity<L: EmbeddingLookup + ?Sized + Sync>(
    quads: &[PairQuadruple<'_>],
    emb: &L,
    exec: Execution,
) -> Result<Vec<RelationOutcome>, RelationError> {
    exec.try_map(quads, |q| eval_pair_intersectivity(q, emb))
}

/// Evaluates every single-adjective phrase; longer phrases are skipped.
pub fn evaluate_nonsubsectivity<L: EmbeddingLookup + ?Sized + Sync>(
    phrases: &[Phrase],
    emb: &L,
    exec: Execution,
) -> Result<Vec<RelationOutcome>, RelationError> {
    let an: Vec<&Phrase> = phrases
        .iter()
        .filter(|p| p.adjective_count() == 1)
        .collect();
    exec.try_map(&an, |p| eval_nonsubsectivity(p, emb))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupKey {
    All,
    Type(AdjectiveType),
    Pair(AdjectiveType, AdjectiveType),
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKey::All => f.write_str("all"),
            GroupKey::Type(t) => write!(f, "{t}"),
            GroupKey::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

impl GroupKey {
    /// Parses the labels produced by `Display`.
    pub fn parse(label: &str) -> Option<Self> {
        let label = label.trim();
        if label == "all" {
            return Some(GroupKey::All);
        }
        if let Some(inner) = label.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
            let (a, b) = inner.split_once(',')?;
            return Some(GroupKey::Pair(
                AdjectiveType::from_short_label(a.trim())?,
                AdjectiveType::from_short_label(b.trim())?,
            ));
        }
        AdjectiveType::from_short_label(label).map(GroupKey::Type)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyCell {
    pub group: GroupKey,
    pub satisfied: usize,
    pub total: usize,
    /// Outcomes whose margin was exactly zero.
    pub ties: usize,
}

impl ConsistencyCell {
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.satisfied as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// Single adjective type; outcomes must carry exactly one type.
    ByType,
    /// Ordered pair of types; outcomes must carry exactly two types.
    ByOrderedTypePair,
}

/// Satisfaction counts per group, in canonical group order. Groups with no
/// outcomes are omitted.
pub fn aggregate(
    outcomes: &[RelationOutcome],
    grouping: Grouping,
) -> Result<Vec<ConsistencyCell>, RelationError> {
    let mut cells: BTreeMap<GroupKey, ConsistencyCell> = BTreeMap::new();
    for o in outcomes {
        let group = match (grouping, o.types.as_slice()) {
            (Grouping::ByType, [t]) => GroupKey::Type(*t),
            (Grouping::ByOrderedTypePair, [a, b]) => GroupKey::Pair(*a, *b),
            (_, types) => {
                return Err(RelationError::Grouping {
                    input: o.input.clone(),
                    reason: format!("{grouping:?} cannot use {} type tag(s)", types.len()),
                })
            }
        };
        tally(cells.entry(group).or_insert(empty_cell(group)), o);
    }
    Ok(cells.into_values().collect())
}

/// One cell over every outcome.
pub fn overall(outcomes: &[RelationOutcome]) -> ConsistencyCell {
    let mut cell = empty_cell(GroupKey::All);
    for o in outcomes {
        tally(&mut cell, o);
    }
    cell
}

fn empty_cell(group: GroupKey) -> ConsistencyCell {
    ConsistencyCell {
        group,
        satisfied: 0,
        total: 0,
        ties: 0,
    }
}

fn tally(cell: &mut ConsistencyCell, o: &RelationOutcome) {
    cell.total += 1;
    cell.satisfied += o.satisfied as usize;
    cell.ties += o.is_tie() as usize;
}

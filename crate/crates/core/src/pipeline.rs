//! End-to-end evaluation: generate the corpus, embed every needed text, run
//! the selected relations, and aggregate them into a [`ResultsBundle`].

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::denotation::SimulationConfig;
use crate::embed::{embed_all, EmbeddingProvider, ProviderError};
use crate::exec::Execution;
use crate::lexicon::Lexicon;
use crate::phrasegen::{
    generate_pair_quadruples, generate_phrases, phrase_texts_needed, PairQuadruple, Phrase,
};
use crate::relations::{
    aggregate, evaluate_intersectivity, evaluate_nonsubsectivity, evaluate_pair_intersectivity,
    overall, Grouping, RelationError, RelationId, RelationOutcome,
};
use crate::report::{ReportError, ResultsBundle, RunMetadata, TableKind, TableResult};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("unknown relation {0:?} (expected intersectivity, pair, non-subsectivity or all)")]
    UnknownRelation(String),
}

/// Which relations to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RelationSet {
    pub intersectivity: bool,
    pub pair_intersectivity: bool,
    pub non_subsectivity: bool,
}

impl RelationSet {
    pub const ALL: Self = Self {
        intersectivity: true,
        pair_intersectivity: true,
        non_subsectivity: true,
    };

    pub fn names(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.intersectivity {
            out.push(RelationId::Intersectivity.to_string());
        }
        if self.pair_intersectivity {
            out.push(RelationId::PairIntersectivity.to_string());
        }
        if self.non_subsectivity {
            out.push(RelationId::NonSubsectivity.to_string());
        }
        out
    }
}

impl FromStr for RelationSet {
    type Err = PipelineError;

    /// Comma-separated list of `intersectivity`, `pair`, `non-subsectivity`, or `all`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = RelationSet {
            intersectivity: false,
            pair_intersectivity: false,
            non_subsectivity: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.replace('_', "-").as_str() {
                "all" => set = RelationSet::ALL,
                "intersectivity" | "set-distance" => set.intersectivity = true,
                "pair" | "pair-intersectivity" => set.pair_intersectivity = true,
                "non-subsectivity" | "nonsubsectivity" => set.non_subsectivity = true,
                _ => return Err(PipelineError::UnknownRelation(part.to_string())),
            }
        }
        if set
            == (RelationSet {
                intersectivity: false,
                pair_intersectivity: false,
                non_subsectivity: false,
            })
        {
            return Err(PipelineError::UnknownRelation(s.to_string()));
        }
        Ok(set)
    }
}

impl fmt::Display for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names().join(","))
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationConfig {
    pub lexicon: Lexicon,
    pub max_adjectives: usize,
    pub relations: RelationSet,
    pub seed: u64,
    /// Provider spec as given by the user, recorded in the metadata.
    pub provider: String,
    pub execution: Execution,
}

impl EvaluationConfig {
    /// SHA-256 over the settings that determine the results. Execution mode
    /// and output location are excluded.
    pub fn digest(&self) -> String {
        let canonical = serde_json::json!({
            "lexicon": self.lexicon.content_hash(),
            "max_adjectives": self.max_adjectives,
            "provider": self.provider,
            "relations": self.relations.names(),
            "seed": self.seed,
        });
        hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
    }
}

/// Digest recorded alongside an exported corpus.
pub fn corpus_digest(lexicon: &Lexicon, max_adjectives: usize) -> String {
    let canonical = serde_json::json!({
        "lexicon": lexicon.content_hash(),
        "max_adjectives": max_adjectives,
    });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

/// Digest of the simulation settings (execution mode excluded).
pub fn oracle_digest(config: &SimulationConfig) -> String {
    let canonical = serde_json::json!({
        "seed": config.seed,
        "universe_size": config.universe_size,
        "trials": config.trials,
        "mix": config.mix,
        "proxy_samples": config.proxy_samples,
    });
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

#[derive(Debug, Clone)]
pub struct EvaluationOutput {
    pub bundle: ResultsBundle,
    pub outcomes: Vec<RelationOutcome>,
}

/// Counts of phrases by adjective count, keyed `AN`, `AAN`, ..., plus `total`.
pub fn phrase_length_counts(phrases: &[Phrase]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for p in phrases {
        *counts.entry(length_label(p.adjective_count())).or_insert(0) += 1;
    }
    counts.insert("total".into(), phrases.len());
    counts
}

pub fn length_label(adjectives: usize) -> String {
    format!("{}N", "A".repeat(adjectives))
}

fn table(outcomes: &[RelationOutcome], grouping: Grouping) -> Result<TableResult, RelationError> {
    Ok(TableResult {
        cells: aggregate(outcomes, grouping)?,
        overall: overall(outcomes),
    })
}

pub fn evaluate<P: EmbeddingProvider + ?Sized>(
    config: &EvaluationConfig,
    provider: &P,
) -> Result<EvaluationOutput, PipelineError> {
    let exec = config.execution;
    let phrases = generate_phrases(&config.lexicon, config.max_adjectives);
    let quads: Vec<PairQuadruple<'_>> = if config.relations.pair_intersectivity {
        generate_pair_quadruples(&config.lexicon).collect()
    } else {
        Vec::new()
    };
    let texts = phrase_texts_needed(&phrases, quads.iter().copied());
    let vectors = embed_all(provider, &texts)?;

    let mut outcomes = Vec::new();
    let mut tables = BTreeMap::new();
    if config.relations.intersectivity {
        let results = evaluate_intersectivity(&phrases, &vectors, exec)?;
        let (an, aan): (Vec<_>, Vec<_>) = results.iter().cloned().partition(|o| o.types.len() == 1);
        tables.insert(TableKind::AnIntersectivity, table(&an, Grouping::ByType)?);
        let two: Vec<_> = aan.into_iter().filter(|o| o.types.len() == 2).collect();
        if !two.is_empty() {
            tables.insert(
                TableKind::AanIntersectivity,
                table(&two, Grouping::ByOrderedTypePair)?,
            );
        }
        outcomes.extend(results);
    }
    if config.relations.pair_intersectivity {
        let results = evaluate_pair_intersectivity(&quads, &vectors, exec)?;
        tables.insert(
            TableKind::PairIntersectivity,
            table(&results, Grouping::ByOrderedTypePair)?,
        );
        outcomes.extend(results);
    }
    if config.relations.non_subsectivity {
        let results = evaluate_nonsubsectivity(&phrases, &vectors, exec)?;
        tables.insert(
            TableKind::NonSubsectivity,
            table(&results, Grouping::ByType)?,
        );
        outcomes.extend(results);
    }

    let mut phrase_counts = phrase_length_counts(&phrases);
    phrase_counts.insert("quadruples".into(), quads.len());
    phrase_counts.insert("unique_texts".into(), texts.len());
    let bundle = ResultsBundle {
        model_id: provider.model_id().to_string(),
        tables,
        metadata: RunMetadata {
            config_digest: config.digest(),
            lexicon_hash: config.lexicon.content_hash(),
            provider: config.provider.clone(),
            seed: config.seed,
            max_adjectives: config.max_adjectives,
            relations: config.relations.names(),
            phrase_counts,
        },
    };
    Ok(EvaluationOutput { bundle, outcomes })
}

/// Line-delimited JSON: a header with the config digest, then one record per
/// outcome (relation, input, type tags, satisfied, margin).
pub fn write_outcomes<W: Write>(
    outcomes: &[RelationOutcome],
    bundle: &ResultsBundle,
    mut out: W,
) -> io::Result<()> {
    let header = serde_json::json!({
        "config_digest": bundle.metadata.config_digest,
        "model": bundle.model_id,
        "outcomes": outcomes.len(),
    });
    writeln!(out, "{header}")?;
    for o in outcomes {
        let types: Vec<&str> = o.types.iter().map(|t| t.short_label()).collect();
        let rec = serde_json::json!({
            "relation": o.relation.to_string(),
            "input": o.input,
            "types": types,
            "satisfied": o.satisfied,
            "margin": o.margin,
        });
        writeln!(out, "{rec}")?;
    }
    out.flush()
}

//! Metamorphic tests for adjective-noun composition in embedding models.
//!
//! The pipeline generates every phrase of the language `(adj )+noun` over a
//! typed lexicon, embeds phrases and their terms, checks distance
//! inequalities that set-theoretic denotations would satisfy, and reports
//! satisfaction rates per adjective type. [`denotation`] simulates the same
//! relations on actual sets under Jaccard distance.

pub mod denotation;
pub mod embed;
pub mod exec;
pub mod geometry;
pub mod lexicon;
pub mod phrasegen;
pub mod pipeline;
pub mod relations;
pub mod report;

pub use exec::Execution;
pub use geometry::{cosine_distance, l2_normalize, mean_pool, EmbeddingVector};
pub use lexicon::{AdjectiveType, Lexicon};
pub use phrasegen::{generate_pair_quadruples, generate_phrases, PairQuadruple, Phrase};

//! Deterministic toy embedder.
//!
//! Word vectors are derived bit-exactly as follows (all arithmetic on `u64`
//! wraps):
//!
//! 1. `h = FNV-1a-64(utf8(word))` with offset basis `0xcbf29ce484222325` and
//!    prime `0x100000001b3`.
//! 2. `key = mix(h ^ mix(seed))`, where `mix` is the SplitMix64 finalizer:
//!    `z ^= z >> 30; z *= 0xbf58476d1ce4e5b9; z ^= z >> 27;
//!    z *= 0x94d049bb133111eb; z ^= z >> 31`.
//! 3. Component `i` (0-based) draws `r = mix(key + (i + 1) * 0x9e3779b97f4a7c15)`
//!    and maps it to `(r >> 11) as f64 / 2^52 - 1.0`, uniform on `[-1, 1)`.
//! 4. The vector is divided by its Euclidean norm, with the sum of squares
//!    accumulated left to right in `f64`.
//!
//! A phrase is split on single spaces and embedded as the componentwise mean
//! of its word vectors (summed left to right, then divided by the word
//! count; a text whose words are all the same gets that word's vector
//! unchanged). The mean is not renormalized.

use crate::exec::Execution;
use crate::geometry::{mean_pool, EmbeddingVector};

use super::{EmbeddingProvider, ProviderError};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Unit-norm vector for a single word.
pub fn toy_word_vector(
    seed: u64,
    dim: usize,
    word: &str,
) -> Result<EmbeddingVector, ProviderError> {
    if dim < 2 {
        return Err(ProviderError::BadDimension(dim));
    }
    if word.is_empty() {
        return Err(ProviderError::EmptyText);
    }
    let key = mix(fnv1a64(word.as_bytes()) ^ mix(seed));
    let raw: Vec<f64> = (0..dim as u64)
        .map(|i| {
            let r = mix(key.wrapping_add((i + 1).wrapping_mul(GAMMA)));
            (r >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect();
    let norm = raw.iter().fold(0.0, |acc, x| acc + x * x).sqrt();
    // norm == 0 would need every 53-bit draw to land exactly on the midpoint.
    EmbeddingVector::new(raw.into_iter().map(|x| x / norm).collect()).map_err(|source| {
        ProviderError::Vector {
            text: word.to_string(),
            source,
        }
    })
}

/// Mean of the unit word vectors of the space-separated words in `text`.
pub fn toy_embed(seed: u64, dim: usize, text: &str) -> Result<EmbeddingVector, ProviderError> {
    let words = text
        .split(' ')
        .filter(|w| !w.is_empty())
        .map(|w| toy_word_vector(seed, dim, w))
        .collect::<Result<Vec<_>, _>>()?;
    if words.is_empty() {
        return Err(ProviderError::EmptyText);
    }
    let refs: Vec<&EmbeddingVector> = words.iter().collect();
    mean_pool(&refs).map_err(|source| ProviderError::Vector {
        text: text.to_string(),
        source,
    })
}

#[derive(Debug, Clone)]
pub struct ToyEmbedder {
    seed: u64,
    dim: usize,
    model_id: String,
    execution: Execution,
}

impl ToyEmbedder {
    pub fn new(seed: u64, dim: usize) -> Result<Self, ProviderError> {
        if dim < 2 {
            return Err(ProviderError::BadDimension(dim));
        }
        Ok(Self {
            seed,
            dim,
            model_id: format!("toy-{seed}-{dim}"),
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl EmbeddingProvider for ToyEmbedder {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        self.execution
            .try_map(texts, |t| toy_embed(self.seed, self.dim, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cosine_distance;
    use crate::lexicon::Lexicon;

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a 64 test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn splitmix_reference_values() {
        // SplitMix64 stream for seed 0 is mix(k * GAMMA) for k = 1, 2, ...
        assert_eq!(mix(GAMMA), 0xe220a8397b1dcdaf);
        assert_eq!(mix(GAMMA.wrapping_mul(2)), 0x6e789e6aa1b965f4);
    }

    #[test]
    fn deterministic_and_unit_norm() {
        let a = toy_embed(7, 64, "dog").unwrap();
        let b = toy_embed(7, 64, "dog").unwrap();
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        assert!((a.norm() - 1.0).abs() < 1e-9);
        assert_ne!(toy_embed(8, 64, "dog").unwrap(), a);
    }

    #[test]
    fn phrase_is_mean_of_words() {
        let red = toy_embed(3, 16, "red").unwrap();
        let dog = toy_embed(3, 16, "dog").unwrap();
        assert_eq!(
            toy_embed(3, 16, "red dog").unwrap(),
            mean_pool(&[&red, &dog]).unwrap()
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            toy_embed(0, 16, ""),
            Err(ProviderError::EmptyText)
        ));
        assert!(matches!(
            toy_embed(0, 16, "  "),
            Err(ProviderError::EmptyText)
        ));
        assert!(matches!(
            toy_embed(0, 1, "dog"),
            Err(ProviderError::BadDimension(1))
        ));
        assert!(ToyEmbedder::new(0, 1).is_err());
    }

    #[test]
    fn no_collisions_over_default_lexicon() {
        let lex = Lexicon::bundled();
        let words: Vec<&str> = lex
            .adjectives()
            .iter()
            .map(|a| a.surface.as_str())
            .chain(lex.nouns().iter().map(String::as_str))
            .collect();
        let vectors: Vec<_> = words
            .iter()
            .map(|w| toy_embed(42, 64, w).unwrap())
            .collect();
        for i in 0..vectors.len() {
            for j in i + 1..vectors.len() {
                let d = cosine_distance(&vectors[i], &vectors[j]).unwrap();
                assert!(d > 0.0 && d < 2.0, "{} vs {}: {d}", words[i], words[j]);
            }
        }
    }

    #[test]
    fn provider_batch_matches_single() {
        let toy = ToyEmbedder::new(5, 8).unwrap();
        assert_eq!(toy.model_id(), "toy-5-8");
        let texts = vec!["red dog".to_string(), "king".to_string()];
        let out = toy.embed(&texts).unwrap();
        assert_eq!(out[0], toy_embed(5, 8, "red dog").unwrap());
        assert_eq!(out[1], toy_embed(5, 8, "king").unwrap());
    }
}

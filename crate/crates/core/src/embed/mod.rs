//! Embedding acquisition: a deterministic toy embedder, a file-backed store,
//! an HTTP client for an embedding service, and a persistent cache.

mod cache;
mod remote;
mod store;
mod toy;

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{EmbeddingVector, GeometryError};

pub use cache::CachedProvider;
pub use remote::{ModelInfo, RemoteClient, RemoteConfig};
pub use store::{load_store, save_store, EmbeddingStore};
pub use toy::{toy_embed, toy_word_vector, ToyEmbedder};

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("no embedding for {0:?}")]
    Missing(String),
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("toy embedder needs dim >= 2, got {0}")]
    BadDimension(usize),
    #[error("{text:?}: {source}")]
    Vector {
        text: String,
        #[source]
        source: GeometryError,
    },
    #[error("dimension clash: store has {expected}, record has {found}")]
    DimensionClash { expected: usize, found: usize },
    #[error("record {record}: {message}")]
    Record { record: usize, message: String },
    #[error("model mismatch: expected {expected:?}, found {found:?}")]
    ModelMismatch { expected: String, found: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("service returned HTTP {status}: {message}")]
    Http { status: u16, message: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that turns texts into vectors.
///
/// Implementations must return one vector per input text, positionally
/// aligned, all of one dimension, and the same vector for the same text.
pub trait EmbeddingProvider: Send + Sync {
    fn model_id(&self) -> &str;

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError>;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        (**self).embed(texts)
    }
}

/// Text → vector lookup used by the relation evaluators.
pub trait EmbeddingLookup: Sync {
    fn vector(&self, text: &str) -> Option<&EmbeddingVector>;
}

impl EmbeddingLookup for HashMap<String, EmbeddingVector> {
    fn vector(&self, text: &str) -> Option<&EmbeddingVector> {
        self.get(text)
    }
}

/// Embeds `texts` and returns them as a lookup table.
pub fn embed_all<P: EmbeddingProvider + ?Sized>(
    provider: &P,
    texts: &[String],
) -> Result<HashMap<String, EmbeddingVector>, ProviderError> {
    let vectors = provider.embed(texts)?;
    if vectors.len() != texts.len() {
        return Err(ProviderError::Protocol(format!(
            "{} vectors for {} texts",
            vectors.len(),
            texts.len()
        )));
    }
    Ok(texts.iter().cloned().zip(vectors).collect())
}

/// Provider selection: `toy:SEED:DIM`, `file:PATH`, or `http:URL:MODEL`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderSpec {
    Toy { seed: u64, dim: usize },
    File { path: std::path::PathBuf },
    Http { endpoint: String, model: String },
}

impl std::str::FromStr for ProviderSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (scheme, rest) = s.split_once(':').ok_or_else(|| {
            format!("provider {s:?} must look like toy:SEED:DIM, file:PATH or http:URL:MODEL")
        })?;
        match scheme {
            "toy" => {
                let (seed, dim) = rest
                    .split_once(':')
                    .ok_or_else(|| format!("expected toy:SEED:DIM, got {s:?}"))?;
                Ok(ProviderSpec::Toy {
                    seed: seed.parse().map_err(|_| format!("bad toy seed {seed:?}"))?,
                    dim: dim
                        .parse()
                        .map_err(|_| format!("bad toy dimension {dim:?}"))?,
                })
            }
            "file" if !rest.is_empty() => Ok(ProviderSpec::File { path: rest.into() }),
            "http" | "https" => {
                let (url, model) = rest
                    .rsplit_once(':')
                    .filter(|(u, m)| !u.is_empty() && !m.is_empty())
                    .ok_or_else(|| format!("expected http:URL:MODEL, got {s:?}"))?;
                let endpoint = if url.starts_with("//") {
                    format!("{scheme}:{url}")
                } else if url.starts_with("http://") || url.starts_with("https://") {
                    url.to_string()
                } else {
                    format!("http://{url}")
                };
                Ok(ProviderSpec::Http {
                    endpoint,
                    model: model.to_string(),
                })
            }
            _ => Err(format!("unknown provider {s:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provider_specs() {
        assert_eq!(
            "toy:7:64".parse(),
            Ok(ProviderSpec::Toy { seed: 7, dim: 64 })
        );
        assert_eq!(
            "file:/tmp/v.jsonl".parse(),
            Ok(ProviderSpec::File {
                path: "/tmp/v.jsonl".into()
            })
        );
        let http = ProviderSpec::Http {
            endpoint: "http://localhost:8000".into(),
            model: "sbert".into(),
        };
        assert_eq!("http:localhost:8000:sbert".parse(), Ok(http.clone()));
        assert_eq!("http:http://localhost:8000:sbert".parse(), Ok(http.clone()));
        assert_eq!("http://localhost:8000:sbert".parse(), Ok(http));
        assert!("toy:7".parse::<ProviderSpec>().is_err());
        assert!("http:sbert".parse::<ProviderSpec>().is_err());
        assert!("onnx:x".parse::<ProviderSpec>().is_err());
    }
}

//! Line-delimited JSON vector files.
//!
//! The first line is `{"model": <string>, "dim": <int>}`; every following
//! line is `{"text": <string>, "vector": [<numbers>]}`. A `dim` of 0 marks a
//! store whose dimension is not yet known (no records). An entirely empty
//! file loads as an empty store.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::geometry::EmbeddingVector;

use super::{EmbeddingLookup, EmbeddingProvider, ProviderError};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct Header {
    pub model: String,
    pub dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct Record {
    pub text: String,
    pub vector: Vec<f64>,
}

/// In-memory vectors for one model, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingStore {
    model: String,
    dim: Option<usize>,
    vectors: IndexMap<String, EmbeddingVector>,
}

impl EmbeddingStore {
    pub fn new(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            dim: None,
            vectors: IndexMap::new(),
        }
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, text: &str) -> Option<&EmbeddingVector> {
        self.vectors.get(text)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &EmbeddingVector)> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Adds or replaces a vector. The first insert fixes the dimension.
    pub fn insert(
        &mut self,
        text: impl Into<String>,
        vector: EmbeddingVector,
    ) -> Result<(), ProviderError> {
        match self.dim {
            Some(d) if d != vector.dim() => {
                return Err(ProviderError::DimensionClash {
                    expected: d,
                    found: vector.dim(),
                })
            }
            None => self.dim = Some(vector.dim()),
            _ => {}
        }
        self.vectors.insert(text.into(), vector);
        Ok(())
    }

    pub(crate) fn header(&self) -> Header {
        Header {
            model: self.model.clone(),
            dim: self.dim.unwrap_or(0),
        }
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, ProviderError> {
        let mut store = EmbeddingStore::default();
        let mut saw_header = false;
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| ProviderError::Record {
                record: idx,
                message,
            };
            if !saw_header {
                let header: Header = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
                store.model = header.model;
                store.dim = (header.dim > 0).then_some(header.dim);
                saw_header = true;
                continue;
            }
            let record: Record = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            let vector = EmbeddingVector::new(record.vector).map_err(|e| bad(e.to_string()))?;
            if store.vectors.contains_key(&record.text) {
                return Err(bad(format!("duplicate text {:?}", record.text)));
            }
            store.insert(record.text, vector)?;
        }
        Ok(store)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), ProviderError> {
        let json = |e: serde_json::Error| ProviderError::Io(e.into());
        serde_json::to_writer(&mut out, &self.header()).map_err(json)?;
        out.write_all(b"\n")?;
        for (text, vector) in &self.vectors {
            write_record(&mut out, text, vector)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn write_record<W: Write>(
    out: &mut W,
    text: &str,
    vector: &EmbeddingVector,
) -> Result<(), ProviderError> {
    #[derive(Serialize)]
    struct RecordRef<'a> {
        text: &'a str,
        vector: &'a [f64],
    }
    serde_json::to_writer(&mut *out, &RecordRef { text, vector })
        .map_err(|e| ProviderError::Io(e.into()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn load_store(path: impl AsRef<Path>) -> Result<EmbeddingStore, ProviderError> {
    EmbeddingStore::read_from(BufReader::new(File::open(path)?))
}

pub fn save_store(store: &EmbeddingStore, path: impl AsRef<Path>) -> Result<(), ProviderError> {
    store.write_to(BufWriter::new(File::create(path)?))
}

impl EmbeddingLookup for EmbeddingStore {
    fn vector(&self, text: &str) -> Option<&EmbeddingVector> {
        self.get(text)
    }
}

impl EmbeddingProvider for EmbeddingStore {
    fn model_id(&self) -> &str {
        &self.model
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        texts
            .iter()
            .map(|t| {
                self.get(t)
                    .cloned()
                    .ok_or_else(|| ProviderError::Missing(t.clone()))
            })
            .collect()
    }
}

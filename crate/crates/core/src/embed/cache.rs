use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use crate::geometry::EmbeddingVector;

use super::store::{load_store, write_record};
use super::{EmbeddingProvider, ProviderError};

/// Persistent (model id, text) → vector cache in front of another provider.
///
/// Backed by one vector file per model id under a cache directory. Writes are
/// serialized; a vector becomes visible to readers only after its record has
/// been appended and flushed.
pub struct CachedProvider<P> {
    inner: P,
    path: PathBuf,
    entries: RwLock<HashMap<String, EmbeddingVector>>,
    writer: Mutex<Option<BufWriter<File>>>,
}

fn file_name(model: &str) -> String {
    let safe: String = model
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.jsonl")
}

impl<P: EmbeddingProvider> CachedProvider<P> {
    pub fn open(inner: P, dir: impl AsRef<Path>) -> Result<Self, ProviderError> {
        fs::create_dir_all(dir.as_ref())?;
        let path = dir.as_ref().join(file_name(inner.model_id()));
        let mut entries = HashMap::new();
        let mut writer = None;
        if path.exists() && fs::metadata(&path)?.len() > 0 {
            let store = load_store(&path)?;
            if store.model() != inner.model_id() {
                return Err(ProviderError::ModelMismatch {
                    expected: inner.model_id().to_string(),
                    found: store.model().to_string(),
                });
            }
            entries.extend(store.iter().map(|(t, v)| (t.to_string(), v.clone())));
            if store.dim().is_some() {
                writer = Some(BufWriter::new(OpenOptions::new().append(true).open(&path)?));
            }
        }
        Ok(Self {
            inner,
            path,
            entries: RwLock::new(entries),
            writer: Mutex::new(writer),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn persist(&self, texts: &[String], vectors: &[EmbeddingVector]) -> Result<(), ProviderError> {
        let mut guard = self.writer.lock().unwrap();
        if guard.is_none() {
            let mut file = BufWriter::new(File::create(&self.path)?);
            let header = super::store::Header {
                model: self.inner.model_id().to_string(),
                dim: vectors.first().map_or(0, EmbeddingVector::dim),
            };
            serde_json::to_writer(&mut file, &header).map_err(|e| ProviderError::Io(e.into()))?;
            file.write_all(b"\n")?;
            *guard = Some(file);
        }
        let file = guard.as_mut().expect("writer initialised above");
        let mut entries = self.entries.write().unwrap();
        let mut fresh = Vec::new();
        for (text, vector) in texts.iter().zip(vectors) {
            if !entries.contains_key(text) && !fresh.iter().any(|(t, _)| *t == text) {
                write_record(file, text, vector)?;
                fresh.push((text, vector));
            }
        }
        file.flush()?;
        for (text, vector) in fresh {
            entries.insert(text.clone(), vector.clone());
        }
        Ok(())
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for CachedProvider<P> {
    fn model_id(&self) -> &str {
        self.inner.model_id()
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        let missing: Vec<String> = {
            let entries = self.entries.read().unwrap();
            let mut seen = std::collections::HashSet::new();
            texts
                .iter()
                .filter(|t| !entries.contains_key(*t) && seen.insert(t.as_str()))
                .cloned()
                .collect()
        };
        if !missing.is_empty() {
            let vectors = self.inner.embed(&missing)?;
            if vectors.len() != missing.len() {
                return Err(ProviderError::Protocol(format!(
                    "{} vectors for {} texts",
                    vectors.len(),
                    missing.len()
                )));
            }
            self.persist(&missing, &vectors)?;
        }
        let entries = self.entries.read().unwrap();
        texts
            .iter()
            .map(|t| {
                entries
                    .get(t)
                    .cloned()
                    .ok_or_else(|| ProviderError::Missing(t.clone()))
            })
            .collect()
    }
}

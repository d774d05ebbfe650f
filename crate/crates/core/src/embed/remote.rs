//! Client for an embedding service speaking the JSON protocol:
//!
//! * `POST <endpoint>/embed` with `{"model", "texts"}` returns
//!   `{"model", "dim", "vectors"}`.
//! * `GET <endpoint>/models` returns `{"models": [{"id", "dim"}]}`.
//!
//! Errors carry an HTTP status and an `{"error": <string>}` body.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use ureq::Agent;

use crate::geometry::EmbeddingVector;

use super::{EmbeddingProvider, ProviderError};

const BODY_LIMIT: u64 = 512 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model: String,
    pub batch_size: usize,
    pub max_retries: u32,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            model: model.into(),
            batch_size: 64,
            max_retries: 4,
            initial_backoff: Duration::from_millis(200),
            max_backoff: Duration::from_secs(5),
            timeout: Duration::from_secs(300),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub id: String,
    pub dim: usize,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    model: String,
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct ModelsResponse {
    models: Vec<ModelInfo>,
}

#[derive(Deserialize)]
struct ErrorBody {
    error: String,
}

enum Attempt {
    Retry(ProviderError),
    Fail(ProviderError),
}

pub struct RemoteClient {
    config: RemoteConfig,
    agent: Agent,
}

impl RemoteClient {
    pub fn new(config: RemoteConfig) -> Self {
        let agent: Agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        Self { config, agent }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    pub fn list_models(&self) -> Result<Vec<ModelInfo>, ProviderError> {
        let url = format!("{}/models", self.config.endpoint);
        let body = self.with_retries(|| {
            let resp = self.agent.get(&url).call();
            read_response(resp)
        })?;
        let parsed: ModelsResponse =
            serde_json::from_str(&body).map_err(|e| ProviderError::Protocol(e.to_string()))?;
        Ok(parsed.models)
    }

    /// Embeds `texts` in batches of `batch_size`, preserving order.
    pub fn fetch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        let mut out = Vec::with_capacity(texts.len());
        let mut dim = None;
        for batch in texts.chunks(self.config.batch_size.max(1)) {
            let vectors = self.fetch_batch(batch)?;
            for v in &vectors {
                match dim {
                    None => dim = Some(v.dim()),
                    Some(d) if d != v.dim() => {
                        return Err(ProviderError::DimensionClash {
                            expected: d,
                            found: v.dim(),
                        })
                    }
                    _ => {}
                }
            }
            out.extend(vectors);
        }
        Ok(out)
    }

    fn fetch_batch(&self, batch: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        let url = format!("{}/embed", self.config.endpoint);
        let request = EmbedRequest {
            model: &self.config.model,
            texts: batch,
        };
        let body = self.with_retries(|| {
            let resp = self.agent.post(&url).send_json(&request);
            read_response(resp)
        })?;
        let parsed: EmbedResponse =
            serde_json::from_str(&body).map_err(|e| ProviderError::Protocol(e.to_string()))?;
        if parsed.model != self.config.model {
            return Err(ProviderError::ModelMismatch {
                expected: self.config.model.clone(),
                found: parsed.model,
            });
        }
        if parsed.vectors.len() != batch.len() {
            return Err(ProviderError::Protocol(format!(
                "service returned {} vectors for {} texts",
                parsed.vectors.len(),
                batch.len()
            )));
        }
        parsed
            .vectors
            .into_iter()
            .zip(batch)
            .map(|(v, text)| {
                if v.len() != parsed.dim {
                    return Err(ProviderError::Protocol(format!(
                        "vector for {text:?} has {} components, service advertised {}",
                        v.len(),
                        parsed.dim
                    )));
                }
                EmbeddingVector::new(v).map_err(|e| ProviderError::Data(format!("{text:?}: {e}")))
            })
            .collect()
    }

    fn with_retries<F>(&self, mut attempt: F) -> Result<String, ProviderError>
    where
        F: FnMut() -> Result<String, Attempt>,
    {
        let mut backoff = self.config.initial_backoff;
        let mut tries = 0;
        loop {
            match attempt() {
                Ok(body) => return Ok(body),
                Err(Attempt::Fail(e)) => return Err(e),
                Err(Attempt::Retry(e)) if tries >= self.config.max_retries => return Err(e),
                Err(Attempt::Retry(_)) => {
                    tries += 1;
                    thread::sleep(backoff);
                    backoff = (backoff * 2).min(self.config.max_backoff);
                }
            }
        }
    }
}

fn read_response(
    resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>,
) -> Result<String, Attempt> {
    let mut resp = resp.map_err(|e| {
        let transient = matches!(
            e,
            ureq::Error::Io(_)
                | ureq::Error::Timeout(_)
                | ureq::Error::ConnectionFailed
                | ureq::Error::BodyStalled
        );
        let err = ProviderError::Transport(e.to_string());
        if transient {
            Attempt::Retry(err)
        } else {
            Attempt::Fail(err)
        }
    })?;
    let status = resp.status().as_u16();
    let body = resp
        .body_mut()
        .with_config()
        .limit(BODY_LIMIT)
        .read_to_string()
        .map_err(|e| Attempt::Retry(ProviderError::Transport(e.to_string())))?;
    if (200..300).contains(&status) {
        return Ok(body);
    }
    let message = serde_json::from_str::<ErrorBody>(&body)
        .map(|b| b.error)
        .unwrap_or(body);
    let err = ProviderError::Http { status, message };
    if status == 429 || status >= 500 {
        Err(Attempt::Retry(err))
    } else {
        Err(Attempt::Fail(err))
    }
}

impl EmbeddingProvider for RemoteClient {
    fn model_id(&self) -> &str {
        &self.config.model
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        self.fetch(texts)
    }
}

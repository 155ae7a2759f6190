//! Deterministic stub client: replays canned responses keyed by prompt hash.

use super::{LlmClient, LlmError, ModelParams};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Mutex;

/// Filename key for a prompt: the first 16 hex chars of its SHA-256.
pub fn prompt_key(prompt: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    hex::encode(hasher.finalize())[..16].to_string()
}

/// Replays canned responses from a fixtures directory (`<key>.txt` files)
/// and/or an in-memory map. Unknown prompts are client errors, which the
/// query-gen retry logic tolerates as shortfall.
pub struct StubLlmClient {
    dir: Option<PathBuf>,
    responses: Mutex<HashMap<String, String>>,
    log_misses: bool,
}

impl StubLlmClient {
    /// Reads responses on demand from `dir/<prompt_key>.txt`.
    pub fn from_dir(dir: impl Into<PathBuf>) -> Self {
        StubLlmClient {
            dir: Some(dir.into()),
            responses: Mutex::new(HashMap::new()),
            log_misses: true,
        }
    }

    /// Fully in-memory stub for unit tests.
    pub fn with_responses<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        StubLlmClient {
            dir: None,
            responses: Mutex::new(
                pairs
                    .into_iter()
                    .map(|(k, v)| (k.into(), v.into()))
                    .collect(),
            ),
            log_misses: false,
        }
    }

    /// Registers a canned response for a full prompt string.
    pub fn insert_for_prompt(&self, prompt: &str, response: impl Into<String>) {
        self.responses
            .lock()
            .unwrap()
            .insert(prompt_key(prompt), response.into());
    }
}

impl LlmClient for StubLlmClient {
    fn complete(&self, prompt: &str, _params: &ModelParams) -> Result<String, LlmError> {
        let key = prompt_key(prompt);
        if let Some(resp) = self.responses.lock().unwrap().get(&key) {
            return Ok(resp.clone());
        }
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{key}.txt"));
            match std::fs::read_to_string(&path) {
                Ok(text) => return Ok(text),
                Err(_) => {
                    if self.log_misses {
                        log::warn!(
                            "stub llm: no canned response {} for prompt starting {:?}",
                            path.display(),
                            prompt.chars().take(60).collect::<String>()
                        );
                    }
                }
            }
        }
        Err(LlmError::Client(format!("no canned response for prompt key {key}")))
    }
}

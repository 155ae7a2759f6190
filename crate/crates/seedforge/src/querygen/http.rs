//! Chat-completion HTTP client (OpenAI-compatible wire format).

use super::{LlmClient, LlmError, ModelParams};
use serde::Deserialize;
use serde_json::json;
use std::time::Duration;

/// Environment variable holding the API key.
pub const API_KEY_ENV: &str = "SEEDFORGE_LLM_API_KEY";
/// Environment variable overriding the endpoint base URL.
pub const BASE_URL_ENV: &str = "SEEDFORGE_LLM_BASE_URL";
const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Debug, Deserialize)]
struct Message {
    content: String,
}

/// Talks to any `/chat/completions`-shaped endpoint.
pub struct HttpLlmClient {
    base_url: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpLlmClient {
    /// Reads base URL and key from the environment.
    pub fn from_env() -> Self {
        let base_url =
            std::env::var(BASE_URL_ENV).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string());
        Self::new(base_url, std::env::var(API_KEY_ENV).ok())
    }

    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
        let client = reqwest::blocking::Client::builder()
            .user_agent(crate::fetch::USER_AGENT)
            .timeout(Duration::from_secs(120))
            .build()
            .expect("reqwest client");
        HttpLlmClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            client,
        }
    }
}

impl LlmClient for HttpLlmClient {
    fn complete(&self, prompt: &str, params: &ModelParams) -> Result<String, LlmError> {
        let url = format!("{}/chat/completions", self.base_url);
        let body = json!({
            "model": params.model_name,
            "temperature": params.temperature,
            "max_tokens": params.max_output_tokens,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.client.post(&url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| LlmError::Client(format!("{url}: {e}")))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| LlmError::Client(format!("{url}: reading body: {e}")))?;
        if !status.is_success() {
            return Err(LlmError::Client(format!("{url}: status {status}: {text}")));
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| LlmError::Malformed(format!("bad completion payload: {e}")))?;
        let content = parsed
            .choices
            .first()
            .map(|c| c.message.content.clone())
            .ok_or_else(|| LlmError::Malformed("completion has no choices".to_string()))?;
        Ok(content)
    }
}

use super::SearchConfig;
use crate::budget::Budget;
use crate::fetch::{urlencode, FetchClient, FetchError};
use serde_json::Value;
use thiserror::Error;

const MAX_SEARCH_BODY: u64 = 4 * 1024 * 1024;

#[derive(Debug, Error)]
pub enum SearchError {
    /// 403/429 from the engine: stop issuing queries, keep what exists.
    #[error("search quota exceeded")]
    QuotaExceeded,
    #[error("search request failed: {0}")]
    Http(String),
    #[error("unusable search payload: {0}")]
    Malformed(String),
}

/// Runs one query, returning result URLs in engine order (at most
/// `config.results_per_query`).
///
/// The payload parser accepts the common provider shapes: `items[].link`,
/// `organic_results[].link`, and `results[]` of strings or `{url}` objects.
pub fn engine_search(
    config: &SearchConfig,
    client: &FetchClient,
    budget: &Budget,
    query: &str,
) -> Result<Vec<String>, SearchError> {
    let sep = if config.base_url.contains('?') { '&' } else { '?' };
    let mut url = format!(
        "{}{}q={}&num={}",
        config.base_url,
        sep,
        urlencode(query),
        config.results_per_query
    );
    if let Some(key) = &config.api_key {
        url.push_str(&format!("&key={}", urlencode(key)));
    }
    let result = client.get(&url, budget, MAX_SEARCH_BODY).map_err(|e| match e {
        FetchError::Status { status: 403, .. } | FetchError::Status { status: 429, .. } => {
            SearchError::QuotaExceeded
        }
        other => SearchError::Http(other.to_string()),
    })?;
    let payload: Value = serde_json::from_slice(&result.bytes)
        .map_err(|e| SearchError::Malformed(e.to_string()))?;
    Ok(parse_result_urls(&payload, config.results_per_query))
}

fn parse_result_urls(payload: &Value, limit: usize) -> Vec<String> {
    let candidates = ["items", "organic_results", "results"];
    for key in candidates {
        let Some(arr) = payload.get(key).and_then(Value::as_array) else {
            continue;
        };
        let mut urls = Vec::new();
        for entry in arr {
            let link = match entry {
                Value::String(s) => Some(s.clone()),
                Value::Object(obj) => obj
                    .get("link")
                    .or_else(|| obj.get("url"))
                    .and_then(Value::as_str)
                    .map(str::to_string),
                _ => None,
            };
            if let Some(link) = link {
                urls.push(link);
                if urls.len() >= limit {
                    break;
                }
            }
        }
        if !urls.is_empty() {
            return urls;
        }
    }
    Vec::new()
}

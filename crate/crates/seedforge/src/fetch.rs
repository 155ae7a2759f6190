//! Budget-aware blocking HTTP client used by every network-facing module.

use crate::budget::Budget;
use std::io::Read;
use std::time::Duration;
use thiserror::Error;

/// Default cap on any single request, tightened further by the remaining
/// budget.
pub const DEFAULT_REQUEST_TIMEOUT: Duration = Duration::from_secs(30);

pub const USER_AGENT: &str = concat!("seedforge/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("budget exhausted before request to {0}")]
    BudgetExhausted(String),
    #[error("request to {url} failed: {source}")]
    Transport {
        url: String,
        #[source]
        source: reqwest::Error,
    },
    #[error("request to {url} returned status {status}")]
    Status { url: String, status: u16 },
    #[error("error reading body from {url}: {source}")]
    Body {
        url: String,
        #[source]
        source: std::io::Error,
    },
}

impl FetchError {
    /// HTTP status code, when the server answered at all.
    pub fn status(&self) -> Option<u16> {
        match self {
            FetchError::Status { status, .. } => Some(*status),
            FetchError::Transport { source, .. } => source.status().map(|s| s.as_u16()),
            _ => None,
        }
    }
}

/// A completed download.
#[derive(Debug, Clone)]
pub struct FetchResult {
    pub bytes: Vec<u8>,
    /// True when the body exceeded the caller's cap and was cut mid-stream.
    pub truncated: bool,
    pub content_type: Option<String>,
    /// URL after redirects.
    pub final_url: String,
    pub status: u16,
}

/// Blocking HTTP client that honours the run budget on every call.
#[derive(Debug, Clone)]
pub struct FetchClient {
    client: reqwest::blocking::Client,
    request_timeout: Duration,
}

impl FetchClient {
    pub fn new() -> Self {
        Self::with_timeout(DEFAULT_REQUEST_TIMEOUT)
    }

    pub fn with_timeout(request_timeout: Duration) -> Self {
        let client = reqwest::blocking::Client::builder()
            .user_agent(USER_AGENT)
            // Per-request deadlines are applied at call time from the budget;
            // this is a backstop for connect stalls.
            .connect_timeout(Duration::from_secs(10))
            .build()
            .expect("reqwest client");
        FetchClient {
            client,
            request_timeout,
        }
    }

    fn effective_timeout(&self, budget: &Budget, url: &str) -> Result<Duration, FetchError> {
        let remaining = budget.remaining();
        if remaining.is_zero() {
            return Err(FetchError::BudgetExhausted(url.to_string()));
        }
        Ok(remaining.min(self.request_timeout))
    }

    /// GET `url`, reading at most `max_bytes` of body. Bodies larger than the
    /// cap are cut mid-stream and flagged `truncated` rather than failing.
    pub fn get(&self, url: &str, budget: &Budget, max_bytes: u64) -> Result<FetchResult, FetchError> {
        self.request(url, budget, max_bytes, None, &[])
    }

    /// GET with extra headers (API tokens, Accept overrides).
    pub fn get_with_headers(
        &self,
        url: &str,
        budget: &Budget,
        max_bytes: u64,
        headers: &[(&str, &str)],
    ) -> Result<FetchResult, FetchError> {
        self.request(url, budget, max_bytes, None, headers)
    }

    /// Ranged GET: bytes `[offset, offset + length)`. Servers that ignore the
    /// Range header still work because reading is capped at `length`.
    pub fn get_range(
        &self,
        url: &str,
        budget: &Budget,
        offset: u64,
        length: u64,
    ) -> Result<FetchResult, FetchError> {
        self.request(url, budget, length, Some((offset, length)), &[])
    }

    fn request(
        &self,
        url: &str,
        budget: &Budget,
        max_bytes: u64,
        range: Option<(u64, u64)>,
        headers: &[(&str, &str)],
    ) -> Result<FetchResult, FetchError> {
        let timeout = self.effective_timeout(budget, url)?;
        let mut req = self.client.get(url).timeout(timeout);
        if let Some((offset, length)) = range {
            req = req.header(
                reqwest::header::RANGE,
                format!("bytes={}-{}", offset, offset + length - 1),
            );
        }
        for (name, value) in headers {
            req = req.header(*name, *value);
        }
        let resp = req.send().map_err(|source| FetchError::Transport {
            url: url.to_string(),
            source,
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(FetchError::Status {
                url: url.to_string(),
                status: status.as_u16(),
            });
        }
        let content_type = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .map(|s| s.to_string());
        let final_url = resp.url().to_string();
        let status = status.as_u16();

        // Stream the body so oversized responses cost at most max_bytes + 1.
        let mut reader = resp.take(max_bytes + 1);
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes).map_err(|source| FetchError::Body {
            url: url.to_string(),
            source,
        })?;
        let truncated = bytes.len() as u64 > max_bytes;
        if truncated {
            bytes.truncate(max_bytes as usize);
        }
        Ok(FetchResult {
            bytes,
            truncated,
            content_type,
            final_url,
            status,
        })
    }
}

impl Default for FetchClient {
    fn default() -> Self {
        Self::new()
    }
}

/// Percent-encodes a query-string component (RFC 3986 unreserved set kept).
pub fn urlencode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => {
                out.push(b as char)
            }
            other => out.push_str(&format!("%{other:02X}")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhausted_budget_fails_before_issuing_request() {
        let client = FetchClient::new();
        let budget = Budget::new(Duration::ZERO);
        let err = client
            .get("http://127.0.0.1:1/never", &budget, 1024)
            .unwrap_err();
        assert!(matches!(err, FetchError::BudgetExhausted(_)));
    }

    #[test]
    fn urlencode_basic() {
        assert_eq!(urlencode("png test files"), "png%20test%20files");
        assert_eq!(urlencode("a+b&c"), "a%2Bb%26c");
        assert_eq!(urlencode("safe-._~09AZaz"), "safe-._~09AZaz");
    }

    #[test]
    fn effective_timeout_is_min_of_budget_and_cap() {
        let client = FetchClient::with_timeout(Duration::from_secs(30));
        let budget = Budget::new(Duration::from_secs(2));
        let t = client.effective_timeout(&budget, "http://x").unwrap();
        assert!(t <= Duration::from_secs(2));

        let long_budget = Budget::new(Duration::from_secs(3600));
        let t = client.effective_timeout(&long_budget, "http://x").unwrap();
        assert_eq!(t, Duration::from_secs(30));
    }
}

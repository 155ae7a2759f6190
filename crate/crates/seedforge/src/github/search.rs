use super::{GithubConfig, GithubError, RepoRef};
use crate::budget::Budget;
use crate::fetch::{urlencode, FetchClient, FetchError};
use serde::Deserialize;

/// Cap on a search-response body; result pages are small.
const MAX_SEARCH_BODY: u64 = 4 * 1024 * 1024;
const BACKOFF_ATTEMPTS: u32 = 3;

#[derive(Debug, Deserialize)]
struct SearchResponse {
    #[serde(default)]
    items: Vec<Item>,
}

#[derive(Debug, Deserialize)]
struct Item {
    full_name: Option<String>,
    clone_url: Option<String>,
    html_url: Option<String>,
}

/// Runs one repository-search query, returning at most
/// `config.results_per_query` repos in API ranking order.
///
/// Rate-limit answers (403/429) back off exponentially and eventually give
/// up on the query; auth failures (401) abort the module.
pub fn search_repos(
    config: &GithubConfig,
    client: &FetchClient,
    budget: &Budget,
    query: &str,
) -> Result<Vec<RepoRef>, GithubError> {
    let url = format!(
        "{}/search/repositories?q={}&per_page={}",
        config.api_base.trim_end_matches('/'),
        urlencode(query),
        config.results_per_query
    );
    let mut headers: Vec<(&str, &str)> = vec![("Accept", "application/vnd.github+json")];
    let auth;
    if let Some(token) = &config.token {
        auth = format!("Bearer {token}");
        headers.push(("Authorization", &auth));
    }

    let mut attempt = 0u32;
    let body = loop {
        if budget.exhausted() {
            return Err(GithubError::Http("budget exhausted".to_string()));
        }
        match client.get_with_headers(&url, budget, MAX_SEARCH_BODY, &headers) {
            Ok(result) => break result.bytes,
            Err(e) => {
                let status = fetch_status(&e);
                match status {
                    Some(401) => return Err(GithubError::Auth(e.to_string())),
                    Some(403) | Some(429) => {
                        attempt += 1;
                        if attempt > BACKOFF_ATTEMPTS {
                            log::warn!("rate limited on {query:?} after {BACKOFF_ATTEMPTS} retries; skipping query");
                            return Err(GithubError::RateLimited);
                        }
                        let delay = std::time::Duration::from_millis(250 << attempt)
                            .min(budget.remaining());
                        log::warn!("rate limited on {query:?}; backing off {delay:?}");
                        std::thread::sleep(delay);
                    }
                    _ => return Err(GithubError::Http(e.to_string())),
                }
            }
        }
    };

    let parsed: SearchResponse = serde_json::from_slice(&body)
        .map_err(|e| GithubError::Malformed(e.to_string()))?;
    let mut repos = Vec::new();
    for item in parsed.items.into_iter().take(config.results_per_query) {
        let Some(full_name) = item.full_name else {
            log::warn!("search item without full_name; skipping");
            continue;
        };
        let clone_url = match (item.clone_url, item.html_url) {
            (Some(u), _) => u,
            (None, Some(h)) => format!("{h}.git"),
            (None, None) => {
                log::warn!("search item {full_name} without clone URL; skipping");
                continue;
            }
        };
        repos.push(RepoRef {
            full_name,
            clone_url,
            matched_query: query.to_string(),
        });
    }
    Ok(repos)
}

fn fetch_status(err: &FetchError) -> Option<u16> {
    err.status()
}

//! Repository harvesting: search a code-hosting API with the 50-query plan,
//! shallow-clone the top hits, and sweep the working trees for valid files.

mod harvest;
mod run;
mod search;

pub use harvest::harvest_repo;
pub use run::run_github;
pub use search::search_repos;

use thiserror::Error;

/// Environment variable holding the API token.
pub const TOKEN_ENV: &str = "SEEDFORGE_GITHUB_TOKEN";

/// One repository hit from the search API.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoRef {
    /// `owner/name`.
    pub full_name: String,
    pub clone_url: String,
    pub matched_query: String,
}

#[derive(Debug, Clone)]
pub struct GithubConfig {
    pub api_base: String,
    pub token: Option<String>,
    /// Top hits taken per query.
    pub results_per_query: usize,
    pub clone_concurrency: usize,
    /// Clones growing past this many bytes are aborted.
    pub repo_size_cap: u64,
    pub git_cmd: String,
}

impl Default for GithubConfig {
    fn default() -> Self {
        GithubConfig {
            api_base: "https://api.github.com".to_string(),
            token: std::env::var(TOKEN_ENV).ok(),
            results_per_query: 10,
            clone_concurrency: 4,
            repo_size_cap: 200 * 1024 * 1024,
            git_cmd: "git".to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum GithubError {
    /// Credential rejected — the whole module aborts.
    #[error("search API authentication failed: {0}")]
    Auth(String),
    #[error("search API rate limited")]
    RateLimited,
    #[error("search request failed: {0}")]
    Http(String),
    #[error("unusable search payload: {0}")]
    Malformed(String),
}

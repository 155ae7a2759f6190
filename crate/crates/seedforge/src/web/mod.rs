//! Web-search harvesting: run the query plan against a search engine, then
//! crawl the result pages breadth-first, capturing files that validate.

mod crawl;
mod frontier;
mod robots;
mod search;

pub use crawl::{crawl, extract_links, looks_like_html};
pub use frontier::CrawlFrontier;
pub use robots::RobotsCache;
pub use search::{engine_search, SearchError};

use crate::budget::Budget;
use crate::corpus::{FileTypeSpec, SourceModule, Subcorpus};
use crate::fetch::FetchClient;
use crate::querygen::QueryPlan;
use std::time::Duration;

/// Environment variable holding the search-engine API key.
pub const SEARCH_KEY_ENV: &str = "SEEDFORGE_SEARCH_API_KEY";

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Search endpoint; queries are appended as `?q=…&num=…`.
    pub base_url: String,
    pub api_key: Option<String>,
    /// Results taken per query.
    pub results_per_query: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            base_url: "https://www.googleapis.com/customsearch/v1".to_string(),
            api_key: std::env::var(SEARCH_KEY_ENV).ok(),
            results_per_query: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrawlConfig {
    /// Concurrent fetch workers.
    pub parallelism: usize,
    /// Minimum interval between requests to one host.
    pub politeness: Duration,
    /// `None` = unbounded (feature-search); web-search uses `Some(3)`.
    pub max_depth: Option<u32>,
    /// Cap on any single response body (pages and files alike).
    pub max_fetch_bytes: u64,
    pub respect_robots: bool,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            parallelism: 16,
            politeness: Duration::from_secs(1),
            max_depth: Some(3),
            max_fetch_bytes: 4 * 1024 * 1024,
            respect_robots: true,
        }
    }
}

/// Runs the whole module: engine search over the plan, then the crawl.
/// Quota exhaustion stops further queries but the crawl proceeds with the
/// results already in hand.
pub fn run_web(
    spec: &FileTypeSpec,
    plan: &QueryPlan,
    search_config: &SearchConfig,
    crawl_config: &CrawlConfig,
    client: &FetchClient,
    budget: &Budget,
    max_file_size: u64,
) -> Subcorpus {
    let seeds = collect_seed_urls(plan, search_config, client, budget);
    log::info!("web: {} seed URLs from {} queries", seeds.len(), plan.queries.len());
    crawl(
        SourceModule::Web,
        &seeds,
        spec,
        budget,
        crawl_config,
        client,
        max_file_size,
    )
}

/// Shared by web- and feature-search: one engine query per plan entry.
pub(crate) fn collect_seed_urls(
    plan: &QueryPlan,
    config: &SearchConfig,
    client: &FetchClient,
    budget: &Budget,
) -> Vec<String> {
    let mut seeds = Vec::new();
    for query in &plan.queries {
        if budget.exhausted() {
            log::warn!("search: budget exhausted; skipping remaining queries");
            break;
        }
        match engine_search(config, client, budget, query) {
            Ok(urls) => seeds.extend(urls),
            Err(SearchError::QuotaExceeded) => {
                log::warn!("search: quota exceeded; proceeding with {} seeds", seeds.len());
                break;
            }
            Err(e) => log::warn!("search: query {query:?} failed: {e}"),
        }
    }
    seeds
}

//! Feature-driven harvesting: the query plan comes from per-feature
//! descriptor expansion (see [`crate::querygen`]), and the crawl that
//! follows each search result is depth-unbounded — pages reachable from a
//! feature-specific query are worth exhausting.

use crate::budget::Budget;
use crate::corpus::{FileTypeSpec, SourceModule, Subcorpus};
use crate::fetch::FetchClient;
use crate::querygen::QueryPlan;
use crate::web::{collect_seed_urls, crawl, CrawlConfig, SearchConfig};

/// Runs the module: one engine search per expanded feature query, then an
/// unbounded-depth crawl of the results. Any `max_depth` on the supplied
/// config is overridden; this module always crawls until the frontier or
/// the budget is exhausted.
pub fn run_feature(
    spec: &FileTypeSpec,
    plan: &QueryPlan,
    search_config: &SearchConfig,
    crawl_config: &CrawlConfig,
    client: &FetchClient,
    budget: &Budget,
    max_file_size: u64,
) -> Subcorpus {
    let mut config = crawl_config.clone();
    config.max_depth = None;
    let seeds = collect_seed_urls(plan, search_config, client, budget);
    log::info!(
        "feature: {} seed URLs from {} expanded queries",
        seeds.len(),
        plan.queries.len()
    );
    crawl(
        SourceModule::Feature,
        &seeds,
        spec,
        budget,
        &config,
        client,
        max_file_size,
    )
}

use super::{harvest_repo, search_repos, GithubConfig, GithubError, RepoRef};
use crate::budget::Budget;
use crate::corpus::{FileTypeSpec, SourceModule, Subcorpus, SubcorpusStats};
use crate::fetch::FetchClient;
use crate::querygen::QueryPlan;
use std::collections::HashSet;
use std::sync::Mutex;

/// Runs the whole module: search with every query, dedup hits, clone and
/// sweep with bounded concurrency. Single-query failures are logged and
/// skipped; an auth failure abandons the remaining queries.
pub fn run_github(
    spec: &FileTypeSpec,
    plan: &QueryPlan,
    config: &GithubConfig,
    client: &FetchClient,
    budget: &Budget,
    max_file_size: u64,
) -> Subcorpus {
    let mut repos: Vec<RepoRef> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for query in &plan.queries {
        if budget.exhausted() {
            log::warn!("github: budget exhausted during search phase");
            break;
        }
        match search_repos(config, client, budget, query) {
            Ok(hits) => {
                for repo in hits {
                    if seen.insert(repo.full_name.clone()) {
                        repos.push(repo);
                    }
                }
            }
            Err(GithubError::Auth(msg)) => {
                log::error!("github: aborting module: {msg}");
                return Subcorpus::empty(SourceModule::Github);
            }
            Err(e) => {
                log::warn!("github: query {query:?} failed: {e}");
            }
        }
    }
    log::info!("github: {} unique repos from {} queries", repos.len(), plan.queries.len());

    let queue: Mutex<std::collections::VecDeque<RepoRef>> =
        Mutex::new(repos.into_iter().collect());
    let collected: Mutex<(Vec<crate::corpus::SeedFile>, SubcorpusStats)> =
        Mutex::new((Vec::new(), SubcorpusStats::default()));

    let workers = config.clone_concurrency.max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if budget.exhausted() {
                    return;
                }
                let Some(repo) = queue.lock().unwrap().pop_front() else {
                    return;
                };
                let (files, stats) = harvest_repo(&repo, spec, budget, config, max_file_size);
                let mut guard = collected.lock().unwrap();
                guard.0.extend(files);
                guard.1.merge(&stats);
            });
        }
    });

    let (files, stats) = collected.into_inner().unwrap();
    Subcorpus::from_collected(SourceModule::Github, files, stats)
}

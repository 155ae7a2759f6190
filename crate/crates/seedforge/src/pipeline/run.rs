//! The pipeline run itself: spawn one thread per enabled module, hard-stop
//! stragglers at budget + grace, then assemble and write the corpus.

use super::{Endpoints, PipelineConfig, PipelineError, RunReport, HARVEST_MODULES, UNREACHABLE};
use crate::assembly::{
    crash_filter, merge_and_filter, minimize, select_balanced, CorpusManifest, CrashFilterConfig,
    DropReason, ManifestConfig, MinimizeConfig, ModuleStatsRecord,
};
use crate::budget::Budget;
use crate::bugtracker::{run_bugtracker, TrackerConfig};
use crate::commoncrawl::{run_commoncrawl, CommonCrawlConfig};
use crate::corpus::{seed_filename, SeedFile, SourceModule, SpecMode, Subcorpus};
use crate::feature::run_feature;
use crate::fetch::FetchClient;
use crate::github::{run_github, GithubConfig};
use crate::querygen::{
    default_params_for, expand_features, gen_bugtracker_queries, gen_feature_descriptors,
    gen_github_queries, gen_web_queries, HttpLlmClient, LlmClient, QueryPlan, StubLlmClient,
};
use crate::web::{run_web, CrawlConfig, SearchConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport, PipelineError> {
    config.validate()?;
    let endpoints = resolve_endpoints(config)?;
    prepare_out_dir(config)?;

    let llm = build_llm(config);
    let jobs = module_jobs(config, &endpoints, llm);
    let (subcorpora, timed_out) = run_modules(jobs, config.module_budget, config.grace);
    for sub in &subcorpora {
        log::info!(
            "module {}: {} files, {} fetched, {} rejected, {} bytes",
            sub.module,
            sub.files.len(),
            sub.stats.fetched,
            sub.stats.rejected,
            sub.stats.bytes_downloaded
        );
    }
    write_subcorpora(config, &subcorpora)?;
    assemble_and_write(config, subcorpora, timed_out)
}

fn resolve_endpoints(config: &PipelineConfig) -> Result<Endpoints, PipelineError> {
    if let Some(explicit) = &config.endpoints {
        return Ok(explicit.clone());
    }
    if let Some(dir) = &config.fixtures_dir {
        return Ok(Endpoints::from_fixtures_dir(dir).map_err(super::ConfigError::from)?);
    }
    Ok(Endpoints::default())
}

/// Refuses to overwrite a previous run's results unless forced.
fn prepare_out_dir(config: &PipelineConfig) -> Result<(), PipelineError> {
    let out = &config.out_dir;
    let leftovers = [
        out.join("manifest.json"),
        out.join("corpus"),
        out.join("subcorpora"),
    ];
    let existing: Vec<&PathBuf> = leftovers.iter().filter(|p| p.exists()).collect();
    if !existing.is_empty() {
        if !config.force {
            return Err(PipelineError::WouldClobber(out.clone()));
        }
        for path in existing {
            let result = if path.is_dir() {
                std::fs::remove_dir_all(path)
            } else {
                std::fs::remove_file(path)
            };
            result.map_err(|source| io_err(path, source))?;
        }
    }
    std::fs::create_dir_all(out.join("corpus")).map_err(|source| io_err(out, source))
}

fn build_llm(config: &PipelineConfig) -> Arc<dyn LlmClient> {
    match &config.fixtures_dir {
        Some(dir) => Arc::new(StubLlmClient::from_dir(dir.join("llm"))),
        None => Arc::new(HttpLlmClient::from_env()),
    }
}

type ModuleJob = Box<dyn FnOnce(&Budget) -> Subcorpus + Send + 'static>;

/// Builds one self-contained closure per enabled module. Each owns its
/// configuration and creates its own HTTP client; they share only the LLM
/// client handle.
fn module_jobs(
    config: &PipelineConfig,
    endpoints: &Endpoints,
    llm: Arc<dyn LlmClient>,
) -> Vec<(SourceModule, ModuleJob)> {
    let fixture_mode = config.fixtures_dir.is_some();
    let mut modules = config.modules.clone();
    modules.sort_by_key(|m| HARVEST_MODULES.iter().position(|h| h == m));

    let mut jobs: Vec<(SourceModule, ModuleJob)> = Vec::new();
    for module in modules {
        let spec = config.spec.clone();
        let max = config.max_file_size;
        let llm = Arc::clone(&llm);
        let job: ModuleJob = match module {
            SourceModule::Github => {
                let gh = github_config(endpoints, fixture_mode);
                Box::new(move |budget| {
                    let params = default_params_for(SourceModule::Github);
                    let plan = plan_or_empty(
                        SourceModule::Github,
                        gen_github_queries(&spec, llm.as_ref(), &params),
                    );
                    run_github(&spec, &plan, &gh, &FetchClient::new(), budget, max)
                })
            }
            SourceModule::Web => {
                let search = web_search_config(endpoints, fixture_mode);
                let crawl = crawl_config(config, endpoints);
                Box::new(move |budget| {
                    let params = default_params_for(SourceModule::Web);
                    let plan = plan_or_empty(
                        SourceModule::Web,
                        gen_web_queries(&spec, llm.as_ref(), &params),
                    );
                    run_web(&spec, &plan, &search, &crawl, &FetchClient::new(), budget, max)
                })
            }
            SourceModule::Feature => {
                let search = feature_search_config(endpoints, fixture_mode);
                let crawl = crawl_config(config, endpoints);
                Box::new(move |budget| {
                    let params = default_params_for(SourceModule::Feature);
                    let plan = plan_or_empty(
                        SourceModule::Feature,
                        gen_feature_descriptors(&spec, llm.as_ref(), &params)
                            .and_then(|d| expand_features(&d, llm.as_ref(), &params)),
                    );
                    run_feature(&spec, &plan, &search, &crawl, &FetchClient::new(), budget, max)
                })
            }
            SourceModule::BugTracker => {
                let trackers = tracker_config(endpoints, fixture_mode);
                Box::new(move |budget| {
                    let params = default_params_for(SourceModule::BugTracker);
                    let plan = plan_or_empty(
                        SourceModule::BugTracker,
                        gen_bugtracker_queries(&spec, llm.as_ref(), &params),
                    );
                    run_bugtracker(&spec, &plan, &trackers, &FetchClient::new(), budget, max)
                })
            }
            SourceModule::CommonCrawl => {
                let cc = commoncrawl_config(endpoints, fixture_mode);
                Box::new(move |budget| {
                    run_commoncrawl(&spec, &cc, &FetchClient::new(), budget, max)
                })
            }
            SourceModule::External => unreachable!("validate() rejects non-harvest modules"),
        };
        jobs.push((module, job));
    }
    jobs
}

fn plan_or_empty(
    module: SourceModule,
    result: Result<QueryPlan, crate::querygen::LlmError>,
) -> QueryPlan {
    result.unwrap_or_else(|e| {
        log::warn!("{module}: query generation failed ({e}); module proceeds with no queries");
        QueryPlan::empty(module)
    })
}

/// Runs every job on its own thread under a fresh per-module budget. Waits
/// for results until budget + grace, then cancels and abandons stragglers
/// (their results are lost; the pipeline proceeds without them).
fn run_modules(
    jobs: Vec<(SourceModule, ModuleJob)>,
    module_budget: Duration,
    grace: Duration,
) -> (Vec<Subcorpus>, Vec<SourceModule>) {
    let deadline = Instant::now() + module_budget + grace;
    let (tx, rx) = mpsc::channel::<Subcorpus>();
    let mut budgets: BTreeMap<SourceModule, Budget> = BTreeMap::new();
    for (module, job) in jobs {
        let budget = Budget::new(module_budget);
        budgets.insert(module, budget.clone());
        let tx = tx.clone();
        std::thread::Builder::new()
            .name(format!("seedforge-{module}"))
            .spawn(move || {
                // send fails if the collector gave up on us; nothing to do
                let _ = tx.send(job(&budget));
            })
            .expect("spawn module thread");
    }
    drop(tx);

    let mut results: BTreeMap<SourceModule, Subcorpus> = BTreeMap::new();
    while results.len() < budgets.len() {
        let timeout = deadline.saturating_duration_since(Instant::now());
        match rx.recv_timeout(timeout) {
            Ok(sub) => {
                results.insert(sub.module, sub);
            }
            Err(_) => break, // deadline passed or all senders gone
        }
    }

    let mut timed_out = Vec::new();
    for (module, budget) in &budgets {
        if !results.contains_key(module) {
            log::error!("module {module} exceeded budget + grace; abandoning it");
            budget.cancel();
            timed_out.push(*module);
            results.insert(*module, Subcorpus::empty(*module));
        }
    }
    (results.into_values().collect(), timed_out)
}

fn github_config(endpoints: &Endpoints, fixture_mode: bool) -> GithubConfig {
    let mut c = GithubConfig::default();
    match (&endpoints.github_api, fixture_mode) {
        (Some(base), _) => c.api_base = base.clone(),
        (None, true) => c.api_base = UNREACHABLE.to_string(),
        (None, false) => {}
    }
    if let Some(n) = endpoints.results_per_query {
        c.results_per_query = n;
    }
    c
}

fn web_search_config(endpoints: &Endpoints, fixture_mode: bool) -> SearchConfig {
    search_config_from(endpoints.web_search.clone(), endpoints, fixture_mode)
}

fn feature_search_config(endpoints: &Endpoints, fixture_mode: bool) -> SearchConfig {
    let base = endpoints
        .feature_search
        .clone()
        .or_else(|| endpoints.web_search.clone());
    search_config_from(base, endpoints, fixture_mode)
}

fn search_config_from(
    base: Option<String>,
    endpoints: &Endpoints,
    fixture_mode: bool,
) -> SearchConfig {
    let mut c = SearchConfig::default();
    match (base, fixture_mode) {
        (Some(base), _) => c.base_url = base,
        (None, true) => c.base_url = UNREACHABLE.to_string(),
        (None, false) => {}
    }
    if let Some(n) = endpoints.results_per_query {
        c.results_per_query = n;
    }
    c
}

fn crawl_config(config: &PipelineConfig, endpoints: &Endpoints) -> CrawlConfig {
    let mut c = CrawlConfig::default();
    if let Some(ms) = endpoints.politeness_ms {
        c.politeness = Duration::from_millis(ms);
    }
    if let Some(p) = config.politeness {
        c.politeness = p;
    }
    c
}

fn tracker_config(endpoints: &Endpoints, fixture_mode: bool) -> TrackerConfig {
    let mut c = TrackerConfig::default();
    if fixture_mode {
        // only fixture-provided trackers; never fall back to live hosts
        c.bugzilla_base = endpoints.bugzilla.clone();
        c.launchpad_base = endpoints.launchpad.clone();
    } else {
        if let Some(base) = &endpoints.bugzilla {
            c.bugzilla_base = Some(base.clone());
        }
        if let Some(base) = &endpoints.launchpad {
            c.launchpad_base = Some(base.clone());
        }
    }
    if let Some(project) = &endpoints.launchpad_project {
        c.launchpad_project = project.clone();
    }
    if let Some(n) = endpoints.results_per_query {
        c.results_per_query = n;
    }
    c
}

fn commoncrawl_config(endpoints: &Endpoints, fixture_mode: bool) -> CommonCrawlConfig {
    let mut c = CommonCrawlConfig::default();
    match (&endpoints.commoncrawl_index, fixture_mode) {
        (Some(base), _) => c.index_base = base.clone(),
        (None, true) => c.index_base = UNREACHABLE.to_string(),
        (None, false) => {}
    }
    match (&endpoints.commoncrawl_archive, fixture_mode) {
        (Some(base), _) => c.archive_base = base.clone(),
        (None, true) => c.archive_base = UNREACHABLE.to_string(),
        (None, false) => {}
    }
    if let Some(id) = &endpoints.crawl_id {
        c.crawl_id = id.clone();
    }
    if let Some(n) = endpoints.per_mime_limit {
        c.per_mime_limit = n;
    }
    c
}

fn write_subcorpora(
    config: &PipelineConfig,
    subcorpora: &[Subcorpus],
) -> Result<(), PipelineError> {
    for sub in subcorpora {
        let dir = config
            .out_dir
            .join("subcorpora")
            .join(sub.module.key());
        write_seed_dir(&dir, config, &sub.files)?;
    }
    Ok(())
}

fn write_seed_dir(
    dir: &Path,
    config: &PipelineConfig,
    files: &[SeedFile],
) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|source| io_err(dir, source))?;
    for file in files {
        let path = dir.join(seed_filename(&config.spec, &file.digest));
        std::fs::write(&path, &file.content).map_err(|source| io_err(&path, source))?;
    }
    Ok(())
}

fn assemble_and_write(
    config: &PipelineConfig,
    subcorpora: Vec<Subcorpus>,
    timed_out: Vec<SourceModule>,
) -> Result<RunReport, PipelineError> {
    let stats_map = module_stats_map(config, &subcorpora);

    let merged = merge_and_filter(&subcorpora, config.max_file_size);
    let mut dropped = merged.dropped;
    let (mut selected, not_selected) = select_balanced(merged.candidates, config.corpus_cap);
    dropped.extend(
        not_selected
            .into_iter()
            .map(|f| (f, DropReason::NotSelected)),
    );

    if let Some(target) = &config.target_cmd {
        let crash_config = CrashFilterConfig {
            target_cmd: target.clone(),
            per_seed_timeout: config.per_seed_timeout,
            ..CrashFilterConfig::default()
        };
        let (kept, crashers) = crash_filter(selected, &crash_config)?;
        log::info!("crash filter: dropped {} crashing seeds", crashers.len());
        selected = kept;
        dropped.extend(crashers.into_iter().map(|f| (f, DropReason::Crasher)));
    }

    let minimize_config = MinimizeConfig {
        mode: config.minimizer_mode,
        external_cmd: config.external_minimizer.clone(),
        target_cmd: config.target_cmd.clone().unwrap_or_default(),
        per_seed_timeout: config.per_seed_timeout,
        ..MinimizeConfig::default()
    };
    let outcome = minimize(selected, &config.spec, &minimize_config, None);
    dropped.extend(
        outcome
            .minimized_out
            .into_iter()
            .map(|f| (f, DropReason::MinimizedOut)),
    );
    let final_files = outcome.kept;

    let manifest = CorpusManifest::build(
        manifest_config(config),
        stats_map.clone(),
        &final_files,
        &dropped,
    );
    manifest.check().map_err(PipelineError::Internal)?;

    let corpus_dir = config.out_dir.join("corpus");
    write_seed_dir(&corpus_dir, config, &final_files)?;
    let manifest_path = config.out_dir.join("manifest.json");
    std::fs::write(&manifest_path, manifest.to_json())
        .map_err(|source| io_err(&manifest_path, source))?;

    Ok(RunReport {
        out_dir: config.out_dir.clone(),
        corpus_dir,
        manifest_path,
        corpus_files: final_files.len(),
        corpus_bytes: final_files.iter().map(|f| f.size_bytes).sum(),
        harvested_files: manifest.files.len() as u64,
        harvested_bytes: manifest.files.iter().map(|r| r.size_bytes).sum(),
        module_stats: stats_map,
        timed_out_modules: timed_out.iter().map(|m| m.key().to_string()).collect(),
        minimizer_used: outcome.mode_used,
        minimizer_failed_open: outcome.failed_open,
    })
}

/// One stats row per harvest module, zeros for disabled ones, so the manifest
/// always answers "what did module X contribute".
fn module_stats_map(
    config: &PipelineConfig,
    subcorpora: &[Subcorpus],
) -> BTreeMap<String, ModuleStatsRecord> {
    let mut map = BTreeMap::new();
    for module in HARVEST_MODULES {
        let record = subcorpora
            .iter()
            .find(|s| s.module == module)
            .map(|s| ModuleStatsRecord::from_stats(&s.stats, s.files.len() as u64))
            .unwrap_or_default();
        map.insert(module.key().to_string(), record);
    }
    debug_assert!(config.modules.iter().all(|m| map.contains_key(m.key())));
    map
}

fn manifest_config(config: &PipelineConfig) -> ManifestConfig {
    let mut modules = config.modules.clone();
    modules.sort_by_key(|m| HARVEST_MODULES.iter().position(|h| h == m));
    ManifestConfig {
        mode: match config.spec.mode {
            SpecMode::Extension => "extension".to_string(),
            SpecMode::Description => "description".to_string(),
        },
        target_type: config.spec.target_phrase().to_string(),
        max_file_size: config.max_file_size,
        corpus_cap: config.corpus_cap,
        module_budget_secs: config.module_budget.as_secs(),
        modules: modules.iter().map(|m| m.key().to_string()).collect(),
        minimizer: config.minimizer_mode.to_string(),
        crash_filter: config.target_cmd.is_some(),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

//! Orchestration: run the enabled harvest modules in parallel under
//! per-module wall-clock budgets, assemble the corpus, and write the corpus
//! directory plus its manifest.

mod endpoints;
mod run;

pub use endpoints::{Endpoints, EndpointsError, ENDPOINTS_FILE, UNREACHABLE};
pub use run::run_pipeline;

use crate::assembly::{
    MinimizerMode, ModuleStatsRecord, DEFAULT_CORPUS_CAP, DEFAULT_MAX_FILE_SIZE,
};
use crate::corpus::{FileTypeSpec, SourceModule, SpecError};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;
use thiserror::Error;

pub const DEFAULT_MODULE_BUDGET: Duration = Duration::from_secs(3600);
/// Hard-stop margin past the budget for workers stuck in a blocking call.
pub const DEFAULT_GRACE: Duration = Duration::from_secs(60);

/// The five gathering modules the pipeline can run.
pub const HARVEST_MODULES: [SourceModule; 5] = [
    SourceModule::Github,
    SourceModule::Web,
    SourceModule::Feature,
    SourceModule::BugTracker,
    SourceModule::CommonCrawl,
];

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub spec: FileTypeSpec,
    pub out_dir: PathBuf,
    /// Enabled harvest modules, any order; duplicates are invalid.
    pub modules: Vec<SourceModule>,
    pub module_budget: Duration,
    pub grace: Duration,
    pub max_file_size: u64,
    pub corpus_cap: usize,
    pub minimizer_mode: MinimizerMode,
    /// External minimizer argv template; `None` uses the afl-cmin default.
    pub external_minimizer: Option<Vec<String>>,
    /// Target argv for the crash pre-filter and minimization (`@@` = input
    /// path). `None` skips the crash filter.
    pub target_cmd: Option<Vec<String>>,
    pub per_seed_timeout: Duration,
    /// Fixture directory: canned LLM responses under `llm/`, endpoint
    /// overrides in `endpoints.toml`. Fixture runs never contact live hosts.
    pub fixtures_dir: Option<PathBuf>,
    /// Explicit endpoint overrides; `None` loads from the fixtures directory.
    pub endpoints: Option<Endpoints>,
    /// Per-host crawl delay override (CLI flag; wins over endpoints file).
    pub politeness: Option<Duration>,
    /// Overwrite existing results in `out_dir`.
    pub force: bool,
}

impl PipelineConfig {
    pub fn new(spec: FileTypeSpec, out_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            spec,
            out_dir: out_dir.into(),
            modules: HARVEST_MODULES.to_vec(),
            module_budget: DEFAULT_MODULE_BUDGET,
            grace: DEFAULT_GRACE,
            max_file_size: DEFAULT_MAX_FILE_SIZE,
            corpus_cap: DEFAULT_CORPUS_CAP,
            minimizer_mode: MinimizerMode::Auto,
            external_minimizer: None,
            target_cmd: None,
            per_seed_timeout: Duration::from_secs(1),
            fixtures_dir: None,
            endpoints: None,
            politeness: None,
            force: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.spec.check()?;
        if self.module_budget.is_zero() {
            return Err(ConfigError::ZeroBudget);
        }
        if self.corpus_cap == 0 {
            return Err(ConfigError::ZeroCap);
        }
        if self.modules.is_empty() {
            return Err(ConfigError::NoModules);
        }
        let mut seen = std::collections::HashSet::new();
        for module in &self.modules {
            if !HARVEST_MODULES.contains(module) {
                return Err(ConfigError::NotHarvest(module.to_string()));
            }
            if !seen.insert(*module) {
                return Err(ConfigError::DuplicateModule(module.to_string()));
            }
        }
        if let Some(target) = &self.target_cmd {
            let program = target.first().ok_or(ConfigError::EmptyTarget)?;
            crate::assembly::resolve_program(program)
                .ok_or_else(|| ConfigError::TargetMissing(program.clone()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("module budget must be positive")]
    ZeroBudget,
    #[error("corpus cap must be positive")]
    ZeroCap,
    #[error("no harvest modules enabled")]
    NoModules,
    #[error("'{0}' is not a harvest module")]
    NotHarvest(String),
    #[error("module '{0}' enabled twice")]
    DuplicateModule(String),
    #[error("target command is empty")]
    EmptyTarget,
    #[error("target program '{0}' not found")]
    TargetMissing(String),
    #[error(transparent)]
    Endpoints(#[from] EndpointsError),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{0} already contains run results; pass --force to overwrite")]
    WouldClobber(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("crash filter failed: {0}")]
    CrashFilter(#[from] crate::assembly::CrashFilterError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// What a pipeline run produced. File counts and byte totals are computed
/// from the manifest, so report and manifest cannot disagree.
#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub corpus_dir: PathBuf,
    pub manifest_path: PathBuf,
    /// Files in the final corpus.
    pub corpus_files: usize,
    pub corpus_bytes: u64,
    /// All files harvested across modules (selected + dropped).
    pub harvested_files: u64,
    pub harvested_bytes: u64,
    pub module_stats: BTreeMap<String, ModuleStatsRecord>,
    /// Modules that blew budget + grace and were abandoned.
    pub timed_out_modules: Vec<String>,
    pub minimizer_used: MinimizerMode,
    pub minimizer_failed_open: bool,
}

impl RunReport {
    /// True when no module contributed a single selected file.
    pub fn corpus_empty(&self) -> bool {
        self.corpus_files == 0
    }
}

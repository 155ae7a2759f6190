//! Command-line interface: `seedforge gen` and `seedforge stats`.
//!
//! Exit codes for `gen`: 0 = corpus written and non-empty; 1 = run finished
//! but the corpus is empty (or a runtime failure); 2 = invalid usage or
//! configuration.

use crate::assembly::MinimizerMode;
use crate::corpus::{FileTypeSpec, SignatureTable, SourceModule};
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineError, HARVEST_MODULES};
use crate::stats::{Direction, StatsArgs};
use clap::{ArgGroup, Args, Parser, Subcommand};
use std::path::PathBuf;
use std::time::Duration;

#[derive(Debug, Parser)]
#[command(
    name = "seedforge",
    version,
    about = "Assembles fuzzing seed corpora from public sources"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Harvest, validate, and assemble a seed corpus for a file type.
    Gen(GenArgs),
    /// Analyze fuzzing trial data: Wilcoxon tests, confidence intervals,
    /// coverage normalization. Emits CSV tables.
    Stats(StatsCmdArgs),
}

#[derive(Debug, Args)]
#[command(group = ArgGroup::new("filetype").required(true).args(["ext", "desc"]))]
pub struct GenArgs {
    /// Target file type by extension, e.g. `png`.
    #[arg(long, value_name = "EXT")]
    pub ext: Option<String>,

    /// Target file type by free-text description (for formats without a
    /// standard extension; disables extension and magic filtering).
    #[arg(long, value_name = "TEXT")]
    pub desc: Option<String>,

    /// Output directory for corpus/, subcorpora/, and manifest.json.
    #[arg(long, default_value = "seedforge-out", value_name = "DIR")]
    pub out: PathBuf,

    /// Per-module wall-clock budget in seconds.
    #[arg(long, default_value_t = 3600, value_name = "SECS")]
    pub module_budget: u64,

    /// Extra seconds past the budget before a stuck module is abandoned.
    #[arg(long, default_value_t = 60, value_name = "SECS")]
    pub grace_secs: u64,

    /// Maximum seed size in bytes; strictly larger files are dropped.
    #[arg(long, default_value_t = 1 << 20, value_name = "BYTES")]
    pub max_file_size: u64,

    /// Maximum number of files in the final corpus.
    #[arg(long, default_value_t = 40_000, value_name = "N")]
    pub cap: usize,

    /// Harvest modules to run (comma-separated).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "github,web,feature,bugtracker,commoncrawl",
        value_name = "LIST"
    )]
    pub modules: Vec<String>,

    /// Target command for the crash pre-filter and minimization; `@@` is
    /// replaced by the input path, otherwise the seed is piped to stdin.
    #[arg(long, value_name = "CMD")]
    pub target: Option<String>,

    /// Minimization strategy. `auto` prefers an external afl-cmin, then the
    /// internal greedy set cover, then none.
    #[arg(
        long,
        default_value = "auto",
        value_parser = ["auto", "external", "internal", "off"],
        value_name = "MODE"
    )]
    pub minimizer: String,

    /// External minimizer command template; `{in}`, `{out}`, `{timeout_ms}`,
    /// and `{target}` are substituted.
    #[arg(long, value_name = "CMD")]
    pub external_minimizer: Option<String>,

    /// Fixtures directory: canned LLM completions under llm/ and service
    /// endpoints in endpoints.toml. With this flag no live host is contacted.
    #[arg(long, value_name = "DIR")]
    pub fixtures: Option<PathBuf>,

    /// Per-host crawl delay override in milliseconds.
    #[arg(long, value_name = "MS")]
    pub politeness_ms: Option<u64>,

    /// Magic-signature table (TOML) replacing the bundled one.
    #[arg(long, value_name = "FILE")]
    pub signature_table: Option<PathBuf>,

    /// Overwrite results of a previous run in the output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
#[command(group = ArgGroup::new("input").required(true).multiple(true).args(["pairs", "series"]))]
pub struct StatsCmdArgs {
    /// CSV of `label,x,y` paired observations (e.g. bugs per target for two
    /// corpora).
    #[arg(long, value_name = "FILE")]
    pub pairs: Option<PathBuf>,

    /// Directory of trial event logs (`corpus`/`target`/`trial` headers, then
    /// `<elapsed> <metric> <value>` lines).
    #[arg(long, value_name = "DIR")]
    pub series: Option<PathBuf>,

    /// Alternative hypothesis for the one-sided Wilcoxon test.
    #[arg(long, default_value = "greater", value_parser = ["greater", "less"])]
    pub direction: String,

    /// Corpus label whose final coverage normalizes the others.
    #[arg(long, value_name = "LABEL")]
    pub baseline: Option<String>,

    /// Output directory for the CSV tables.
    #[arg(long, default_value = "stats-out", value_name = "DIR")]
    pub out: PathBuf,
}

/// Maps module names as accepted on the command line.
pub fn parse_module(name: &str) -> Option<SourceModule> {
    HARVEST_MODULES
        .into_iter()
        .find(|m| m.key() == name.trim().to_ascii_lowercase())
}

/// Builds the pipeline configuration; any rejection here is a usage error.
pub fn gen_config(args: &GenArgs) -> Result<PipelineConfig, String> {
    let spec = match (&args.ext, &args.desc) {
        (Some(ext), None) => {
            let table = match &args.signature_table {
                Some(path) => {
                    &*Box::leak(Box::new(SignatureTable::from_path(path).map_err(|e| {
                        format!("--signature-table: {e}")
                    })?))
                }
                None => SignatureTable::bundled(),
            };
            FileTypeSpec::extension(ext, table).map_err(|e| e.to_string())?
        }
        (None, Some(desc)) => FileTypeSpec::description(desc).map_err(|e| e.to_string())?,
        _ => unreachable!("clap enforces exactly one of --ext/--desc"),
    };

    let mut modules = Vec::new();
    for name in &args.modules {
        let module =
            parse_module(name).ok_or_else(|| format!("unknown module '{name}' in --modules"))?;
        if !modules.contains(&module) {
            modules.push(module);
        }
    }

    let mut config = PipelineConfig::new(spec, &args.out);
    config.modules = modules;
    config.module_budget = Duration::from_secs(args.module_budget);
    config.grace = Duration::from_secs(args.grace_secs);
    config.max_file_size = args.max_file_size;
    config.corpus_cap = args.cap;
    config.minimizer_mode = args
        .minimizer
        .parse::<MinimizerMode>()
        .map_err(|e| e.to_string())?;
    config.external_minimizer = args
        .external_minimizer
        .as_deref()
        .map(|cmd| split_command(cmd, "--external-minimizer"))
        .transpose()?;
    config.target_cmd = args
        .target
        .as_deref()
        .map(|cmd| split_command(cmd, "--target"))
        .transpose()?;
    config.fixtures_dir = args.fixtures.clone();
    config.politeness = args.politeness_ms.map(Duration::from_millis);
    config.force = args.force;
    Ok(config)
}

fn split_command(cmd: &str, flag: &str) -> Result<Vec<String>, String> {
    match shlex::split(cmd) {
        Some(argv) if !argv.is_empty() => Ok(argv),
        _ => Err(format!("{flag}: cannot parse command '{cmd}'")),
    }
}

/// Runs `seedforge gen`; returns the process exit code.
pub fn run_gen(args: &GenArgs) -> i32 {
    let config = match gen_config(args) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return 2;
        }
    };
    match run_pipeline(&config) {
        Ok(report) => {
            for (module, stats) in &report.module_stats {
                println!(
                    "{module}: harvested {} files ({} fetched, {} rejected, {} bytes downloaded)",
                    stats.harvested, stats.fetched, stats.rejected, stats.bytes_downloaded
                );
            }
            if !report.timed_out_modules.is_empty() {
                eprintln!(
                    "warning: abandoned at budget + grace: {}",
                    report.timed_out_modules.join(", ")
                );
            }
            if report.minimizer_failed_open {
                eprintln!("warning: minimization failed; corpus left unminimized");
            }
            println!(
                "corpus: {} files, {} bytes (of {} harvested) in {}",
                report.corpus_files,
                report.corpus_bytes,
                report.harvested_files,
                report.corpus_dir.display()
            );
            println!("manifest: {}", report.manifest_path.display());
            if report.corpus_empty() {
                eprintln!(
                    "error: no module produced a selectable seed file; corpus is empty \
                     (check connectivity, credentials, and the file type)"
                );
                1
            } else {
                0
            }
        }
        Err(e @ (PipelineError::Config(_) | PipelineError::WouldClobber(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Runs `seedforge stats`; returns the process exit code.
pub fn run_stats(args: &StatsCmdArgs) -> i32 {
    let direction = args
        .direction
        .parse::<Direction>()
        .expect("clap restricts the values");
    let stats_args = StatsArgs {
        pairs: args.pairs.clone(),
        series: args.series.clone(),
        direction,
        baseline_corpus: args.baseline.clone(),
        out_dir: args.out.clone(),
    };
    match crate::stats::run_stats(&stats_args) {
        Ok(written) => {
            for path in written {
                println!("wrote {}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

//! Corpus minimization: drive an external afl-cmin-style tool, or fall back
//! to an internal greedy set cover over per-seed coverage.

use super::crash::{resolve_program, INPUT_PLACEHOLDER};
use crate::corpus::{seed_filename, FileTypeSpec, SeedFile};
use crate::proc::run_with_deadline;
use std::collections::{HashSet, VecDeque};
use std::path::Path;
use std::process::Command;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinimizerMode {
    Auto,
    External,
    Internal,
    Off,
}

impl FromStr for MinimizerMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(MinimizerMode::Auto),
            "external" => Ok(MinimizerMode::External),
            "internal" => Ok(MinimizerMode::Internal),
            "off" => Ok(MinimizerMode::Off),
            other => Err(format!("unknown minimizer mode '{other}' (auto|external|internal|off)")),
        }
    }
}

impl std::fmt::Display for MinimizerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MinimizerMode::Auto => "auto",
            MinimizerMode::External => "external",
            MinimizerMode::Internal => "internal",
            MinimizerMode::Off => "off",
        };
        write!(f, "{s}")
    }
}

/// Template tokens understood in `external_cmd`: `{in}`, `{out}`,
/// `{timeout_ms}`, and `{target}` (spliced with the full target argv).
pub const DEFAULT_EXTERNAL_TEMPLATE: &[&str] = &[
    "afl-cmin", "-i", "{in}", "-o", "{out}", "-t", "{timeout_ms}", "--", "{target}",
];

#[derive(Debug, Clone)]
pub struct MinimizeConfig {
    pub mode: MinimizerMode,
    /// External minimizer argv template; defaults to afl-cmin's flags.
    pub external_cmd: Option<Vec<String>>,
    /// Instrumented target argv (`@@` replaced by the input path).
    pub target_cmd: Vec<String>,
    pub per_seed_timeout: Duration,
    pub workers: usize,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            mode: MinimizerMode::Auto,
            external_cmd: None,
            target_cmd: Vec::new(),
            per_seed_timeout: Duration::from_secs(1),
            workers: 8,
        }
    }
}

/// "run seed → edge-id set" adapter: the internal minimizer only needs each
/// seed's covered edges, however they are obtained.
pub trait CoverageRunner: Sync {
    fn edges(&self, seed: &SeedFile) -> Result<Vec<u32>, String>;
}

/// Coverage via subprocess: runs the target on the seed and reads edge ids
/// (whitespace-separated integers) from its stdout.
pub struct EdgeListRunner {
    target_cmd: Vec<String>,
    per_seed_timeout: Duration,
}

impl EdgeListRunner {
    pub fn new(target_cmd: Vec<String>, per_seed_timeout: Duration) -> Self {
        EdgeListRunner {
            target_cmd,
            per_seed_timeout,
        }
    }
}

impl CoverageRunner for EdgeListRunner {
    fn edges(&self, seed: &SeedFile) -> Result<Vec<u32>, String> {
        let uses_file = self
            .target_cmd
            .iter()
            .any(|a| a.contains(INPUT_PLACEHOLDER));
        let dir;
        let mut seed_path = std::path::PathBuf::new();
        if uses_file {
            dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            seed_path = dir.path().join(&seed.digest);
            std::fs::write(&seed_path, &seed.content).map_err(|e| e.to_string())?;
        }
        let mut cmd = Command::new(self.target_cmd.first().ok_or("empty target command")?);
        for arg in &self.target_cmd[1..] {
            cmd.arg(arg.replace(INPUT_PLACEHOLDER, &seed_path.to_string_lossy()));
        }
        let stdin = (!uses_file).then(|| seed.content.clone());
        let out = run_with_deadline(cmd, self.per_seed_timeout, stdin, None)
            .map_err(|e| e.to_string())?;
        if out.timed_out {
            return Err(format!("coverage run for {} timed out", seed.digest));
        }
        let text = String::from_utf8_lossy(&out.stdout);
        let mut edges = Vec::new();
        for token in text.split_whitespace() {
            match token.parse::<u32>() {
                Ok(edge) => edges.push(edge),
                Err(_) => return Err(format!("unparsable edge id {token:?}")),
            }
        }
        Ok(edges)
    }
}

#[derive(Debug)]
pub struct MinimizeOutcome {
    pub kept: Vec<SeedFile>,
    pub minimized_out: Vec<SeedFile>,
    /// True when minimization failed and the corpus passed through
    /// unminimized.
    pub failed_open: bool,
    pub mode_used: MinimizerMode,
}

impl MinimizeOutcome {
    fn pass_through(seeds: Vec<SeedFile>, failed: bool, mode: MinimizerMode) -> Self {
        MinimizeOutcome {
            kept: seeds,
            minimized_out: Vec::new(),
            failed_open: failed,
            mode_used: mode,
        }
    }
}

/// Minimizes `seeds` per the configured mode. Failures never shrink the
/// corpus: on any error the input passes through with `failed_open` set —
/// a larger corpus is usable, an empty one is not.
pub fn minimize(
    seeds: Vec<SeedFile>,
    spec: &FileTypeSpec,
    config: &MinimizeConfig,
    runner: Option<&dyn CoverageRunner>,
) -> MinimizeOutcome {
    if seeds.is_empty() {
        return MinimizeOutcome::pass_through(seeds, false, MinimizerMode::Off);
    }
    let mode = resolve_mode(config, runner.is_some());
    match mode {
        MinimizerMode::Off => MinimizeOutcome::pass_through(seeds, false, MinimizerMode::Off),
        MinimizerMode::External => minimize_external(seeds, spec, config),
        MinimizerMode::Internal => minimize_internal(seeds, config, runner),
        MinimizerMode::Auto => unreachable!("resolve_mode returns a concrete mode"),
    }
}

fn resolve_mode(config: &MinimizeConfig, have_runner: bool) -> MinimizerMode {
    match config.mode {
        MinimizerMode::Auto => {
            let external_available = config.external_cmd.is_some()
                || (!config.target_cmd.is_empty() && resolve_program("afl-cmin").is_some());
            if external_available {
                MinimizerMode::External
            } else if have_runner || !config.target_cmd.is_empty() {
                MinimizerMode::Internal
            } else {
                log::warn!("minimize: no external tool, runner, or target; skipping");
                MinimizerMode::Off
            }
        }
        fixed => fixed,
    }
}

fn minimize_external(
    seeds: Vec<SeedFile>,
    spec: &FileTypeSpec,
    config: &MinimizeConfig,
) -> MinimizeOutcome {
    let template: Vec<String> = config.external_cmd.clone().unwrap_or_else(|| {
        DEFAULT_EXTERNAL_TEMPLATE.iter().map(|s| s.to_string()).collect()
    });
    if template.iter().any(|t| t == "{target}") && config.target_cmd.is_empty() {
        log::error!("minimize: external template needs a target command; corpus left unminimized");
        return MinimizeOutcome::pass_through(seeds, true, MinimizerMode::External);
    }

    let work = match tempfile::tempdir() {
        Ok(dir) => dir,
        Err(e) => {
            log::error!("minimize: no scratch space ({e}); corpus left unminimized");
            return MinimizeOutcome::pass_through(seeds, true, MinimizerMode::External);
        }
    };
    let in_dir = work.path().join("in");
    let out_dir = work.path().join("out");
    if let Err(e) = std::fs::create_dir_all(&in_dir) {
        log::error!("minimize: {e}; corpus left unminimized");
        return MinimizeOutcome::pass_through(seeds, true, MinimizerMode::External);
    }
    for seed in &seeds {
        let path = in_dir.join(seed_filename(spec, &seed.digest));
        if let Err(e) = std::fs::write(&path, &seed.content) {
            log::error!("minimize: cannot materialize {}: {e}; corpus left unminimized", seed.digest);
            return MinimizeOutcome::pass_through(seeds, true, MinimizerMode::External);
        }
    }

    let timeout_ms = config.per_seed_timeout.as_millis().to_string();
    let mut argv: Vec<String> = Vec::new();
    for token in &template {
        match token.as_str() {
            "{in}" => argv.push(in_dir.to_string_lossy().to_string()),
            "{out}" => argv.push(out_dir.to_string_lossy().to_string()),
            "{timeout_ms}" => argv.push(timeout_ms.clone()),
            "{target}" => argv.extend(config.target_cmd.iter().cloned()),
            other => argv.push(other.to_string()),
        }
    }
    log::info!("minimize: running {}", argv.join(" "));
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..]);
    // generous overall deadline: per-seed budget for every seed plus slack
    let overall = config.per_seed_timeout * (seeds.len() as u32) + Duration::from_secs(60);
    let run = run_with_deadline(cmd, overall, None, None);
    let ok = match &run {
        Ok(out) if out.timed_out => {
            log::error!("minimize: external minimizer timed out");
            false
        }
        Ok(out) if !out.success() => {
            log::error!(
                "minimize: external minimizer failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            false
        }
        Ok(_) => true,
        Err(e) => {
            log::error!("minimize: cannot run external minimizer: {e}");
            false
        }
    };
    if !ok {
        return MinimizeOutcome::pass_through(seeds, true, MinimizerMode::External);
    }

    let survivors = match read_survivor_digests(&out_dir) {
        Ok(digests) if !digests.is_empty() => digests,
        Ok(_) => {
            log::error!("minimize: external minimizer produced an empty corpus; keeping input");
            return MinimizeOutcome::pass_through(seeds, true, MinimizerMode::External);
        }
        Err(e) => {
            log::error!("minimize: cannot read minimizer output: {e}; keeping input");
            return MinimizeOutcome::pass_through(seeds, true, MinimizerMode::External);
        }
    };
    let (kept, minimized_out): (Vec<_>, Vec<_>) = seeds
        .into_iter()
        .partition(|s| survivors.contains(&s.digest));
    MinimizeOutcome {
        kept,
        minimized_out,
        failed_open: false,
        mode_used: MinimizerMode::External,
    }
}

/// Digests of the files an external minimizer wrote to its output
/// directory, identified by content (minimizers may rename).
fn read_survivor_digests(out_dir: &Path) -> std::io::Result<HashSet<String>> {
    let mut digests = HashSet::new();
    for entry in std::fs::read_dir(out_dir)? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            let content = std::fs::read(entry.path())?;
            digests.insert(crate::corpus::content_digest(&content));
        }
    }
    Ok(digests)
}

fn minimize_internal(
    seeds: Vec<SeedFile>,
    config: &MinimizeConfig,
    runner: Option<&dyn CoverageRunner>,
) -> MinimizeOutcome {
    let subprocess_runner;
    let runner: &dyn CoverageRunner = match runner {
        Some(r) => r,
        None if !config.target_cmd.is_empty() => {
            subprocess_runner =
                EdgeListRunner::new(config.target_cmd.clone(), config.per_seed_timeout);
            &subprocess_runner
        }
        None => {
            log::error!("minimize: internal mode needs a coverage source; corpus left unminimized");
            return MinimizeOutcome::pass_through(seeds, true, MinimizerMode::Internal);
        }
    };

    // canonical greedy order: ascending (size, digest)
    let mut seeds = seeds;
    seeds.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    // coverage collection fans out; the keep/drop decisions stay sequential
    let bitmaps: Vec<Result<Vec<u32>, String>> = {
        let queue: Mutex<VecDeque<usize>> = Mutex::new((0..seeds.len()).collect());
        let results: Mutex<Vec<Option<Result<Vec<u32>, String>>>> =
            Mutex::new(vec![None; seeds.len()]);
        std::thread::scope(|scope| {
            for _ in 0..config.workers.max(1) {
                scope.spawn(|| loop {
                    let Some(idx) = queue.lock().unwrap().pop_front() else {
                        return;
                    };
                    let edges = runner.edges(&seeds[idx]);
                    results.lock().unwrap()[idx] = Some(edges);
                });
            }
        });
        results
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|r| r.expect("every index processed"))
            .collect()
    };
    if let Some(err) = bitmaps.iter().find_map(|b| b.as_ref().err()) {
        log::error!("minimize: coverage collection failed ({err}); corpus left unminimized");
        return MinimizeOutcome::pass_through(seeds, true, MinimizerMode::Internal);
    }

    let mut covered: HashSet<u32> = HashSet::new();
    let mut kept = Vec::new();
    let mut minimized_out = Vec::new();
    for (seed, edges) in seeds.into_iter().zip(&bitmaps) {
        let edges = edges.as_ref().expect("errors handled above");
        let adds_coverage = edges.iter().any(|e| !covered.contains(e));
        if adds_coverage {
            covered.extend(edges.iter().copied());
            kept.push(seed);
        } else {
            minimized_out.push(seed);
        }
    }
    MinimizeOutcome {
        kept,
        minimized_out,
        failed_open: false,
        mode_used: MinimizerMode::Internal,
    }
}

//! Pre-fuzzing crash filter: run each selected seed through the target once
//! and drop seeds that crash it outright.

use crate::corpus::SeedFile;
use crate::proc::run_with_deadline;
use std::collections::VecDeque;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

/// Placeholder in the target command replaced by the seed file path. Seeds
/// are piped to stdin when the command has no placeholder.
pub const INPUT_PLACEHOLDER: &str = "@@";

#[derive(Debug, Clone)]
pub struct CrashFilterConfig {
    /// Target argv; `@@` tokens are replaced by the seed path.
    pub target_cmd: Vec<String>,
    pub per_seed_timeout: Duration,
    pub workers: usize,
}

impl Default for CrashFilterConfig {
    fn default() -> Self {
        CrashFilterConfig {
            target_cmd: Vec::new(),
            per_seed_timeout: Duration::from_secs(1),
            workers: 8,
        }
    }
}

#[derive(Debug, Error)]
pub enum CrashFilterError {
    #[error("empty target command")]
    EmptyCommand,
    #[error("target binary not found: {0}")]
    TargetMissing(String),
    #[error("cannot create scratch directory: {0}")]
    Scratch(std::io::Error),
}

/// Executes every seed against the target once. Seeds that die by signal
/// are dropped as crashers; timeouts and nonzero exits keep the seed (a
/// hang or parse error is exactly what fuzzing wants to explore). Returns
/// (kept, crashers), both in canonical order.
pub fn crash_filter(
    seeds: Vec<SeedFile>,
    config: &CrashFilterConfig,
) -> Result<(Vec<SeedFile>, Vec<SeedFile>), CrashFilterError> {
    let program = config.target_cmd.first().ok_or(CrashFilterError::EmptyCommand)?;
    resolve_program(program).ok_or_else(|| CrashFilterError::TargetMissing(program.clone()))?;
    let scratch = tempfile::tempdir().map_err(CrashFilterError::Scratch)?;

    let queue: Mutex<VecDeque<SeedFile>> = Mutex::new(seeds.into());
    let outcome: Mutex<(Vec<SeedFile>, Vec<SeedFile>)> = Mutex::new((Vec::new(), Vec::new()));
    std::thread::scope(|scope| {
        for worker in 0..config.workers.max(1) {
            let scratch = scratch.path().join(format!("w{worker}"));
            scope.spawn({
                let scratch = scratch.clone();
                let queue = &queue;
                let outcome = &outcome;
                move || {
                    std::fs::create_dir_all(&scratch).ok();
                    loop {
                        let Some(seed) = queue.lock().unwrap().pop_front() else {
                            return;
                        };
                        let crashed = seed_crashes(&seed, config, &scratch);
                        let mut guard = outcome.lock().unwrap();
                        if crashed {
                            guard.1.push(seed);
                        } else {
                            guard.0.push(seed);
                        }
                    }
                }
            });
        }
    });

    let (mut kept, mut crashers) = outcome.into_inner().unwrap();
    kept.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    crashers.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok((kept, crashers))
}

fn seed_crashes(seed: &SeedFile, config: &CrashFilterConfig, scratch: &Path) -> bool {
    let uses_file = config.target_cmd.iter().any(|a| a.contains(INPUT_PLACEHOLDER));
    let seed_path = scratch.join(&seed.digest);
    if uses_file {
        let written = std::fs::File::create(&seed_path)
            .and_then(|mut f| f.write_all(&seed.content));
        if let Err(e) = written {
            log::warn!("crash filter: cannot materialize seed {}: {e}; keeping it", seed.digest);
            return false;
        }
    }
    let mut cmd = Command::new(&config.target_cmd[0]);
    for arg in &config.target_cmd[1..] {
        cmd.arg(arg.replace(INPUT_PLACEHOLDER, &seed_path.to_string_lossy()));
    }
    let stdin = if uses_file { None } else { Some(seed.content.clone()) };
    let result = run_with_deadline(cmd, config.per_seed_timeout, stdin, None);
    if uses_file {
        std::fs::remove_file(&seed_path).ok();
    }
    match result {
        Ok(out) if out.timed_out => {
            log::warn!(
                "crash filter: seed {} timed out after {:?}; kept (timeout is not a crash)",
                seed.digest,
                config.per_seed_timeout
            );
            false
        }
        Ok(out) => {
            let crashed = out.signal().is_some();
            if crashed {
                log::info!(
                    "crash filter: seed {} crashed the target (signal {:?})",
                    seed.digest,
                    out.signal()
                );
            }
            crashed
        }
        Err(e) => {
            log::warn!("crash filter: running seed {} failed: {e}; keeping it", seed.digest);
            false
        }
    }
}

/// Finds the target binary: literal path when the name contains a
/// separator, PATH lookup otherwise.
pub(crate) fn resolve_program(program: &str) -> Option<PathBuf> {
    let candidate = Path::new(program);
    if program.contains('/') {
        return candidate.is_file().then(|| candidate.to_path_buf());
    }
    let path = std::env::var_os("PATH")?;
    std::env::split_paths(&path)
        .map(|dir| dir.join(program))
        .find(|p| p.is_file())
}

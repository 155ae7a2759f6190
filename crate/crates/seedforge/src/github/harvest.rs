use super::{GithubConfig, RepoRef};
use crate::budget::Budget;
use crate::corpus::{validate_file, SeedFile, SourceModule, SubcorpusStats, FileTypeSpec};
use crate::proc::run_with_deadline;
use std::path::Path;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

/// How often the clone watchdog re-measures the checkout size.
const SIZE_CHECK_INTERVAL_MS: u64 = 500;

/// Shallow-clones one repository and sweeps its working tree, returning the
/// accepted files and counters. Failures degrade to an empty result; budget
/// exhaustion mid-sweep keeps the partial harvest.
pub fn harvest_repo(
    repo: &RepoRef,
    spec: &FileTypeSpec,
    budget: &Budget,
    config: &GithubConfig,
    max_file_size: u64,
) -> (Vec<SeedFile>, SubcorpusStats) {
    let mut stats = SubcorpusStats::default();
    if budget.exhausted() {
        return (Vec::new(), stats);
    }
    let Ok(checkout) = tempfile::tempdir() else {
        log::warn!("{}: cannot create temp dir", repo.full_name);
        return (Vec::new(), stats);
    };
    let dest = checkout.path().join("repo");

    let mut cmd = Command::new(&config.git_cmd);
    cmd.arg("clone")
        .arg("--depth")
        .arg("1")
        .arg("--no-tags")
        .arg(&repo.clone_url)
        .arg(&dest)
        .env("GIT_TERMINAL_PROMPT", "0");

    // Abort clones that grow past the size cap; re-measuring is rate-limited
    // because the poll loop is hot.
    let last_check = AtomicU64::new(0);
    let started = Instant::now();
    let cap = config.repo_size_cap;
    let dest_for_watchdog = dest.clone();
    let watchdog = move || {
        let elapsed_ms = started.elapsed().as_millis() as u64;
        let prev = last_check.load(Ordering::Relaxed);
        if elapsed_ms.saturating_sub(prev) < SIZE_CHECK_INTERVAL_MS {
            return false;
        }
        last_check.store(elapsed_ms, Ordering::Relaxed);
        dir_size(&dest_for_watchdog) > cap
    };

    let outcome = run_with_deadline(cmd, budget.remaining(), None, Some(&watchdog));
    match outcome {
        Ok(out) if out.success() => {}
        Ok(out) if out.killed_by_watchdog => {
            log::warn!(
                "{}: clone exceeded size cap ({} bytes); skipping repo",
                repo.full_name,
                config.repo_size_cap
            );
            return (Vec::new(), stats);
        }
        Ok(out) if out.timed_out => {
            log::warn!("{}: clone hit the module budget; skipping repo", repo.full_name);
            return (Vec::new(), stats);
        }
        Ok(out) => {
            log::warn!(
                "{}: clone failed: {}",
                repo.full_name,
                String::from_utf8_lossy(&out.stderr).trim()
            );
            return (Vec::new(), stats);
        }
        Err(e) => {
            log::warn!("{}: cannot spawn {}: {e}", repo.full_name, config.git_cmd);
            return (Vec::new(), stats);
        }
    }

    let files = sweep_tree(&dest, repo, spec, budget, max_file_size, &mut stats);
    (files, stats)
}

/// Walks a checkout and validates every regular file. The `.git` directory
/// is skipped; symlinks are not followed.
fn sweep_tree(
    root: &Path,
    repo: &RepoRef,
    spec: &FileTypeSpec,
    budget: &Budget,
    max_file_size: u64,
    stats: &mut SubcorpusStats,
) -> Vec<SeedFile> {
    let base_url = repo.clone_url.trim_end_matches(".git").trim_end_matches('/');
    let mut files = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.file_name() != ".git");
    for entry in walker {
        if budget.exhausted() {
            log::warn!("{}: budget exhausted mid-sweep; keeping partial harvest", repo.full_name);
            break;
        }
        let Ok(entry) = entry else { continue };
        if !entry.file_type().is_file() {
            continue;
        }
        stats.fetched += 1;
        let meta_len = entry.metadata().map(|m| m.len()).unwrap_or(0);
        if meta_len > max_file_size {
            stats.rejected += 1;
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .to_string_lossy()
            .replace('\\', "/");
        let Ok(content) = std::fs::read(entry.path()) else {
            stats.rejected += 1;
            continue;
        };
        stats.bytes_downloaded += content.len() as u64;
        let outcome = validate_file(spec, &rel, &content);
        match outcome {
            crate::corpus::ValidationOutcome::Accepted(validation) => {
                stats.validated += 1;
                files.push(SeedFile::new(
                    content,
                    SourceModule::Github,
                    format!("{base_url}/{rel}"),
                    validation,
                ));
            }
            crate::corpus::ValidationOutcome::Rejected => {
                stats.rejected += 1;
            }
        }
    }
    files
}

fn dir_size(path: &Path) -> u64 {
    walkdir::WalkDir::new(path)
        .follow_links(false)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter_map(|e| e.metadata().ok())
        .filter(|m| m.is_file())
        .map(|m| m.len())
        .sum()
}

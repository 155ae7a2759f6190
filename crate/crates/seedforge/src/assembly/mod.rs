//! Corpus assembly: merge the module subcorpora, enforce the size filter,
//! select a balanced corpus up to the cap, optionally drop crashing seeds,
//! and drive minimization.

mod crash;
mod manifest;
mod minimize;

pub use crash::{crash_filter, CrashFilterConfig, CrashFilterError};
pub(crate) use crash::resolve_program;
pub use manifest::{
    CorpusManifest, FileRecord, ManifestConfig, ModuleStatsRecord, MANIFEST_SCHEMA_VERSION,
};
pub use minimize::{
    minimize, CoverageRunner, EdgeListRunner, MinimizeConfig, MinimizeOutcome, MinimizerMode,
};

use crate::corpus::{dedup_partition, SeedFile, SourceModule, Subcorpus};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Default corpus cap.
pub const DEFAULT_CORPUS_CAP: usize = 40_000;
/// Default maximum seed size: 1 MiB; strictly larger files are dropped.
pub const DEFAULT_MAX_FILE_SIZE: u64 = 1 << 20;

/// Why a harvested file is absent from the final corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DropReason {
    Oversize,
    Duplicate,
    NotSelected,
    Crasher,
    #[serde(rename = "Minimized-out")]
    MinimizedOut,
}

impl std::fmt::Display for DropReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DropReason::Oversize => "Oversize",
            DropReason::Duplicate => "Duplicate",
            DropReason::NotSelected => "NotSelected",
            DropReason::Crasher => "Crasher",
            DropReason::MinimizedOut => "Minimized-out",
        };
        write!(f, "{s}")
    }
}

/// Result of the merge stage: deduplicated, size-filtered candidates plus
/// every file dropped on the way, each with its reason.
#[derive(Debug, Default)]
pub struct MergeOutcome {
    pub candidates: Vec<SeedFile>,
    pub dropped: Vec<(SeedFile, DropReason)>,
}

/// Merges subcorpora in canonical module order, deduplicates by digest, and
/// drops files strictly larger than `max_file_size`.
pub fn merge_and_filter(subcorpora: &[Subcorpus], max_file_size: u64) -> MergeOutcome {
    let mut ordered: Vec<&Subcorpus> = subcorpora.iter().collect();
    ordered.sort_by_key(|s| module_rank(s.module));
    let files: Vec<SeedFile> = ordered
        .iter()
        .flat_map(|s| s.files.iter().cloned())
        .collect();
    merge_and_filter_files(files, max_file_size)
}

/// The merge stage over a flat file list; [`merge_and_filter`] after
/// concatenation. Idempotent: feeding the candidates back in drops nothing.
pub fn merge_and_filter_files(files: Vec<SeedFile>, max_file_size: u64) -> MergeOutcome {
    let (kept, duplicates) = dedup_partition(files);
    let mut outcome = MergeOutcome::default();
    outcome
        .dropped
        .extend(duplicates.into_iter().map(|f| (f, DropReason::Duplicate)));
    for file in kept {
        if file.size_bytes > max_file_size {
            outcome.dropped.push((file, DropReason::Oversize));
        } else {
            outcome.candidates.push(file);
        }
    }
    outcome
}

fn module_rank(module: SourceModule) -> usize {
    SourceModule::ALL
        .iter()
        .position(|m| *m == module)
        .unwrap_or(SourceModule::ALL.len())
}

/// Balanced smallest-first selection. With at most `cap` candidates,
/// everything is selected. Otherwise each module's candidates are sorted
/// ascending by (size, digest) and modules are drained round-robin — one
/// file per module with supply left, in canonical module order — until the
/// cap is reached. Returns (selected, not_selected), both in canonical
/// (size, digest) order.
pub fn select_balanced(candidates: Vec<SeedFile>, cap: usize) -> (Vec<SeedFile>, Vec<SeedFile>) {
    if candidates.len() <= cap {
        let mut selected = candidates;
        selected.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        return (selected, Vec::new());
    }

    let mut per_module: BTreeMap<usize, Vec<SeedFile>> = BTreeMap::new();
    for file in candidates {
        per_module
            .entry(module_rank(file.source_module))
            .or_default()
            .push(file);
    }
    let mut queues: Vec<std::vec::IntoIter<SeedFile>> = per_module
        .into_values()
        .map(|mut files| {
            files.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
            files.into_iter()
        })
        .collect();

    let mut selected = Vec::with_capacity(cap);
    let mut rest = Vec::new();
    'fill: loop {
        let mut any = false;
        for queue in &mut queues {
            if let Some(file) = queue.next() {
                any = true;
                selected.push(file);
                if selected.len() == cap {
                    break 'fill;
                }
            }
        }
        if !any {
            break;
        }
    }
    for queue in &mut queues {
        rest.extend(queue);
    }
    selected.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    rest.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    (selected, rest)
}

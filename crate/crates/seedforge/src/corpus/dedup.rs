use super::SeedFile;
use std::collections::HashSet;

/// Removes duplicate content. Files are put into the canonical order (size
/// ascending, then digest lexicographic — a stable sort, so same-digest
/// duplicates keep their relative input order) and the first file per digest
/// is retained; the output stays in that canonical order.
pub fn dedup(files: Vec<SeedFile>) -> Vec<SeedFile> {
    dedup_partition(files).0
}

/// Like [`dedup`], but also returns the dropped duplicates so callers can
/// account for them.
pub fn dedup_partition(mut files: Vec<SeedFile>) -> (Vec<SeedFile>, Vec<SeedFile>) {
    files.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let mut seen: HashSet<String> = HashSet::with_capacity(files.len());
    let mut kept = Vec::with_capacity(files.len());
    let mut dropped = Vec::new();
    for file in files {
        if seen.insert(file.digest.clone()) {
            kept.push(file);
        } else {
            dropped.push(file);
        }
    }
    (kept, dropped)
}

//! The corpus manifest: one record per harvested file with its fate, module
//! statistics, and a snapshot of the effective configuration.

use super::DropReason;
use crate::corpus::{SeedFile, SubcorpusStats};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// One harvested file's fate. `selected` and `dropped_reason` are mutually
/// exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub digest: String,
    pub size_bytes: u64,
    pub source_module: String,
    pub origin_url: String,
    pub selected: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dropped_reason: Option<DropReason>,
}

/// Configuration snapshot embedded in the manifest. Deliberately excludes
/// timestamps, endpoint hosts/ports, and local paths so identical runs yield
/// identical manifests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestConfig {
    pub mode: String,
    pub target_type: String,
    pub max_file_size: u64,
    pub corpus_cap: usize,
    pub module_budget_secs: u64,
    pub modules: Vec<String>,
    pub minimizer: String,
    pub crash_filter: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleStatsRecord {
    pub fetched: u64,
    pub validated: u64,
    pub rejected: u64,
    pub bytes_downloaded: u64,
    /// Files the module contributed to assembly.
    pub harvested: u64,
}

impl ModuleStatsRecord {
    pub fn from_stats(stats: &SubcorpusStats, harvested: u64) -> Self {
        ModuleStatsRecord {
            fetched: stats.fetched,
            validated: stats.validated,
            rejected: stats.rejected,
            bytes_downloaded: stats.bytes_downloaded,
            harvested,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub schema_version: u32,
    pub config: ManifestConfig,
    pub module_stats: BTreeMap<String, ModuleStatsRecord>,
    /// Every harvested file exactly once, sorted by (size, digest, module,
    /// origin).
    pub files: Vec<FileRecord>,
}

impl CorpusManifest {
    /// Builds the manifest from the assembly outcome: the final corpus plus
    /// every dropped file with its reason.
    pub fn build(
        config: ManifestConfig,
        module_stats: BTreeMap<String, ModuleStatsRecord>,
        selected: &[SeedFile],
        dropped: &[(SeedFile, DropReason)],
    ) -> Self {
        let mut files: Vec<FileRecord> = Vec::with_capacity(selected.len() + dropped.len());
        for seed in selected {
            files.push(record_for(seed, true, None));
        }
        for (seed, reason) in dropped {
            files.push(record_for(seed, false, Some(*reason)));
        }
        files.sort_by(|a, b| {
            (a.size_bytes, &a.digest, &a.source_module, &a.origin_url).cmp(&(
                b.size_bytes,
                &b.digest,
                &b.source_module,
                &b.origin_url,
            ))
        });
        CorpusManifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            config,
            module_stats,
            files,
        }
    }

    /// Count of selected files per drop reason plus the grand total:
    /// (selected, per-reason counts, total records).
    pub fn accounting(&self) -> (u64, BTreeMap<String, u64>, u64) {
        let mut selected = 0u64;
        let mut reasons: BTreeMap<String, u64> = BTreeMap::new();
        for file in &self.files {
            if file.selected {
                selected += 1;
            }
            if let Some(reason) = file.dropped_reason {
                *reasons.entry(reason.to_string()).or_default() += 1;
            }
        }
        (selected, reasons, self.files.len() as u64)
    }

    /// Verifies the structural invariants: selected and dropped_reason are
    /// mutually exclusive and exhaustive, and selected plus drops equals the
    /// record total (the accounting identity).
    pub fn check(&self) -> Result<(), String> {
        for file in &self.files {
            match (file.selected, file.dropped_reason) {
                (true, Some(reason)) => {
                    return Err(format!(
                        "{} is selected but carries drop reason {reason}",
                        file.digest
                    ))
                }
                (false, None) => {
                    return Err(format!("{} is neither selected nor dropped", file.digest))
                }
                _ => {}
            }
        }
        let (selected, reasons, total) = self.accounting();
        let dropped: u64 = reasons.values().sum();
        if selected + dropped != total {
            return Err(format!(
                "accounting mismatch: {selected} selected + {dropped} dropped != {total} records"
            ));
        }
        let harvested: u64 = self.module_stats.values().map(|s| s.harvested).sum();
        if harvested != total {
            return Err(format!(
                "accounting mismatch: modules harvested {harvested} files but manifest records {total}"
            ));
        }
        Ok(())
    }

    /// Stable pretty JSON (maps are ordered, files are sorted).
    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("manifest serializes");
        json.push('\n');
        json
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}

fn record_for(seed: &SeedFile, selected: bool, dropped_reason: Option<DropReason>) -> FileRecord {
    FileRecord {
        digest: seed.digest.clone(),
        size_bytes: seed.size_bytes,
        source_module: seed.source_module.key().to_string(),
        origin_url: seed.origin_url.clone(),
        selected,
        dropped_reason,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{SourceModule, Validation};

    fn seed(module: SourceModule, content: &[u8]) -> SeedFile {
        SeedFile::new(
            content.to_vec(),
            module,
            format!("http://origin/{}", content.len()),
            Validation::ByExtension,
        )
    }

    fn config() -> ManifestConfig {
        ManifestConfig {
            mode: "extension".to_string(),
            target_type: "png".to_string(),
            max_file_size: 1 << 20,
            corpus_cap: 40_000,
            module_budget_secs: 3600,
            modules: vec!["github".to_string(), "web".to_string()],
            minimizer: "off".to_string(),
            crash_filter: false,
        }
    }

    #[test]
    fn build_and_check_accounting() {
        let selected = vec![seed(SourceModule::Github, b"aa"), seed(SourceModule::Web, b"bbb")];
        let dropped = vec![
            (seed(SourceModule::Web, b"aa"), DropReason::Duplicate),
            (seed(SourceModule::Github, b"cccc"), DropReason::NotSelected),
        ];
        let stats = BTreeMap::from([
            (
                "github".to_string(),
                ModuleStatsRecord {
                    harvested: 2,
                    ..Default::default()
                },
            ),
            (
                "web".to_string(),
                ModuleStatsRecord {
                    harvested: 2,
                    ..Default::default()
                },
            ),
        ]);
        let manifest = CorpusManifest::build(config(), stats, &selected, &dropped);
        manifest.check().unwrap();
        let (sel, reasons, total) = manifest.accounting();
        assert_eq!(sel, 2);
        assert_eq!(total, 4);
        assert_eq!(reasons.get("Duplicate"), Some(&1));
        assert_eq!(reasons.get("NotSelected"), Some(&1));
    }

    #[test]
    fn check_rejects_contradictory_record() {
        let mut manifest = CorpusManifest::build(
            config(),
            BTreeMap::from([(
                "web".to_string(),
                ModuleStatsRecord {
                    harvested: 1,
                    ..Default::default()
                },
            )]),
            &[seed(SourceModule::Web, b"x")],
            &[],
        );
        manifest.files[0].dropped_reason = Some(DropReason::Crasher);
        assert!(manifest.check().is_err());
    }

    #[test]
    fn json_round_trip_is_stable() {
        let manifest = CorpusManifest::build(
            config(),
            BTreeMap::from([(
                "web".to_string(),
                ModuleStatsRecord {
                    harvested: 2,
                    ..Default::default()
                },
            )]),
            &[seed(SourceModule::Web, b"one"), seed(SourceModule::Web, b"four")],
            &[],
        );
        let json = manifest.to_json();
        let back = CorpusManifest::from_json(&json).unwrap();
        assert_eq!(manifest, back);
        assert_eq!(json, back.to_json(), "serialization is deterministic");
        assert!(json.contains("\"schema_version\": 1"));
    }

    #[test]
    fn minimized_out_reason_spelled_with_hyphen() {
        let dropped = vec![(seed(SourceModule::Web, b"zz"), DropReason::MinimizedOut)];
        let manifest = CorpusManifest::build(
            config(),
            BTreeMap::from([(
                "web".to_string(),
                ModuleStatsRecord {
                    harvested: 1,
                    ..Default::default()
                },
            )]),
            &[],
            &dropped,
        );
        assert!(manifest.to_json().contains("\"Minimized-out\""));
    }
}

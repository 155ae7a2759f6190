//! Core corpus data types shared by every gathering module, plus content
//! hashing, validation, and deduplication.

mod dedup;
mod digest;
mod signatures;
mod validate;

pub use dedup::{dedup, dedup_partition};
pub use digest::content_digest;
pub use signatures::{SignatureEntry, SignatureTable};
pub use validate::{extension_of, validate_file, ValidationOutcome};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

/// Which gathering module produced a seed file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceModule {
    Github,
    Web,
    Feature,
    BugTracker,
    CommonCrawl,
    External,
}

impl SourceModule {
    /// Canonical rotation order used wherever per-module processing must be
    /// deterministic (merging, balanced selection).
    pub const ALL: [SourceModule; 6] = [
        SourceModule::Github,
        SourceModule::Web,
        SourceModule::Feature,
        SourceModule::BugTracker,
        SourceModule::CommonCrawl,
        SourceModule::External,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            SourceModule::Github => "github",
            SourceModule::Web => "web",
            SourceModule::Feature => "feature",
            SourceModule::BugTracker => "bugtracker",
            SourceModule::CommonCrawl => "commoncrawl",
            SourceModule::External => "external",
        }
    }
}

impl fmt::Display for SourceModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Which rule admitted a seed file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validation {
    ByExtension,
    ByMagic,
    /// Description mode: extension and magic filtering are disabled.
    Unfiltered,
}

/// One candidate input file with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedFile {
    pub content: Vec<u8>,
    pub size_bytes: u64,
    /// Hex SHA-256 of `content`.
    pub digest: String,
    pub source_module: SourceModule,
    pub origin_url: String,
    /// Unix seconds at harvest time.
    pub retrieved_at: u64,
    pub validation: Validation,
}

impl SeedFile {
    /// Wraps raw content, computing size and digest so the struct invariants
    /// hold by construction.
    pub fn new(
        content: Vec<u8>,
        source_module: SourceModule,
        origin_url: impl Into<String>,
        validation: Validation,
    ) -> Self {
        let digest = content_digest(&content);
        let size_bytes = content.len() as u64;
        let retrieved_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        SeedFile {
            content,
            size_bytes,
            digest,
            source_module,
            origin_url: origin_url.into(),
            retrieved_at,
            validation,
        }
    }

    /// Sort key used for canonical ordering: size ascending, then digest.
    pub fn sort_key(&self) -> (u64, &str) {
        (self.size_bytes, self.digest.as_str())
    }
}

/// Per-module harvest counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcorpusStats {
    /// Resources examined (files swept, pages fetched, records read).
    pub fetched: u64,
    /// Files accepted by validation.
    pub validated: u64,
    /// Candidates that failed validation.
    pub rejected: u64,
    pub bytes_downloaded: u64,
}

impl SubcorpusStats {
    pub fn merge(&mut self, other: &SubcorpusStats) {
        self.fetched += other.fetched;
        self.validated += other.validated;
        self.rejected += other.rejected;
        self.bytes_downloaded += other.bytes_downloaded;
    }
}

/// The seed set produced by one gathering module before merging.
#[derive(Debug, Clone)]
pub struct Subcorpus {
    pub module: SourceModule,
    pub files: Vec<SeedFile>,
    pub stats: SubcorpusStats,
}

impl Subcorpus {
    pub fn empty(module: SourceModule) -> Self {
        Subcorpus {
            module,
            files: Vec::new(),
            stats: SubcorpusStats::default(),
        }
    }

    /// Builds a subcorpus from raw collected files. Files are ordered by
    /// origin URL before dedup so the surviving representative of each digest
    /// does not depend on worker scheduling.
    pub fn from_collected(
        module: SourceModule,
        mut files: Vec<SeedFile>,
        stats: SubcorpusStats,
    ) -> Self {
        files.sort_by(|a, b| a.origin_url.cmp(&b.origin_url).then(a.digest.cmp(&b.digest)));
        let files = dedup(files);
        Subcorpus {
            module,
            files,
            stats,
        }
    }

    pub fn total_bytes(&self) -> u64 {
        self.files.iter().map(|f| f.size_bytes).sum()
    }
}

/// Whether the target type is named by extension or by free-text description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecMode {
    Extension,
    Description,
}

/// One magic-byte signature: `bytes` must appear at `offset`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MagicSignature {
    pub offset: usize,
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
}

impl MagicSignature {
    pub fn matches(&self, content: &[u8]) -> bool {
        content
            .get(self.offset..self.offset + self.bytes.len())
            .is_some_and(|window| window == self.bytes)
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let raw = String::deserialize(d)?;
        hex::decode(&raw).map_err(serde::de::Error::custom)
    }
}

/// The target input format the pipeline is assembling a corpus for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileTypeSpec {
    pub mode: SpecMode,
    /// Lowercase extension without the dot (Extension mode only).
    pub primary_extension: String,
    /// Equivalent extensions, e.g. jpg/jpeg.
    pub aliases: Vec<String>,
    pub magic_signatures: Vec<MagicSignature>,
    pub mime_types: Vec<String>,
    /// Free text naming the format (Description mode only).
    pub description: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("extension must be non-empty")]
    EmptyExtension,
    #[error("description must be non-empty")]
    EmptyDescription,
    #[error("magic signature has empty bytes")]
    EmptySignature,
    #[error("description mode does not take extensions or signatures")]
    DescriptionWithFilters,
}

impl FileTypeSpec {
    /// Builds an Extension-mode spec, filling aliases, signatures, and mime
    /// types from the signature table. Unknown extensions yield a spec that
    /// matches by extension only.
    pub fn extension(ext: &str, table: &SignatureTable) -> Result<Self, SpecError> {
        let primary = ext.trim().trim_start_matches('.').to_ascii_lowercase();
        if primary.is_empty() {
            return Err(SpecError::EmptyExtension);
        }
        let spec = match table.lookup(&primary) {
            Some(entry) => FileTypeSpec {
                mode: SpecMode::Extension,
                primary_extension: primary.clone(),
                aliases: entry.extensions.clone(),
                magic_signatures: entry.magic.clone(),
                mime_types: entry.mime_types.clone(),
                description: String::new(),
            },
            None => {
                log::warn!("extension '{primary}' not in signature table; matching by extension only");
                FileTypeSpec {
                    mode: SpecMode::Extension,
                    primary_extension: primary.clone(),
                    aliases: vec![primary],
                    magic_signatures: Vec::new(),
                    mime_types: Vec::new(),
                    description: String::new(),
                }
            }
        };
        spec.check()?;
        Ok(spec)
    }

    /// Builds a Description-mode spec: the type has no standard extension and
    /// all content filtering is disabled.
    pub fn description(text: &str) -> Result<Self, SpecError> {
        let description = text.trim().to_string();
        if description.is_empty() {
            return Err(SpecError::EmptyDescription);
        }
        Ok(FileTypeSpec {
            mode: SpecMode::Description,
            primary_extension: String::new(),
            aliases: Vec::new(),
            magic_signatures: Vec::new(),
            mime_types: Vec::new(),
            description,
        })
    }

    /// Enforces the structural invariants for the mode.
    pub fn check(&self) -> Result<(), SpecError> {
        match self.mode {
            SpecMode::Extension => {
                if self.primary_extension.is_empty()
                    || self.primary_extension.starts_with('.')
                    || self.primary_extension != self.primary_extension.to_ascii_lowercase()
                {
                    return Err(SpecError::EmptyExtension);
                }
                if self.magic_signatures.iter().any(|s| s.bytes.is_empty()) {
                    return Err(SpecError::EmptySignature);
                }
            }
            SpecMode::Description => {
                if self.description.is_empty() {
                    return Err(SpecError::EmptyDescription);
                }
                if !self.magic_signatures.is_empty() || !self.aliases.is_empty() {
                    return Err(SpecError::DescriptionWithFilters);
                }
            }
        }
        Ok(())
    }

    /// The phrase interpolated into prompts and filenames: the extension in
    /// Extension mode, the description otherwise.
    pub fn target_phrase(&self) -> &str {
        match self.mode {
            SpecMode::Extension => &self.primary_extension,
            SpecMode::Description => &self.description,
        }
    }

    /// All extensions that count as a match (primary plus aliases), lowercase.
    pub fn matching_extensions(&self) -> Vec<String> {
        let mut exts = vec![self.primary_extension.clone()];
        for alias in &self.aliases {
            let alias = alias.to_ascii_lowercase();
            if !exts.contains(&alias) {
                exts.push(alias);
            }
        }
        exts
    }

    pub fn extension_matches(&self, ext: &str) -> bool {
        let ext = ext.to_ascii_lowercase();
        self.primary_extension == ext || self.aliases.iter().any(|a| a.eq_ignore_ascii_case(&ext))
    }
}

/// Filename convention for seeds materialized on disk: `<digest>.<ext>`, or
/// the bare digest in Description mode.
pub fn seed_filename(spec: &FileTypeSpec, digest: &str) -> String {
    match spec.mode {
        SpecMode::Extension => format!("{digest}.{}", spec.primary_extension),
        SpecMode::Description => digest.to_string(),
    }
}

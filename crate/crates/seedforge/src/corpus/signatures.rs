use super::MagicSignature;
use serde::Deserialize;
use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;
use thiserror::Error;

/// The signature table bundled into the binary. Users can override it with
/// `--signature-table`.
const BUNDLED: &str = include_str!("../../data/signatures.toml");

#[derive(Debug, Error)]
pub enum SignatureError {
    #[error("failed to read signature table: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse signature table: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("signature table entry '{0}' is invalid: {1}")]
    Entry(String, String),
}

/// One file type's identification data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureEntry {
    /// All extensions this type is known under, lowercase, primary first.
    pub extensions: Vec<String>,
    pub magic: Vec<MagicSignature>,
    pub mime_types: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RawTable {
    #[allow(dead_code)]
    version: Option<u32>,
    #[serde(default)]
    types: HashMap<String, RawEntry>,
}

#[derive(Debug, Deserialize)]
struct RawEntry {
    #[serde(default)]
    extensions: Vec<String>,
    #[serde(default)]
    magic: Vec<RawMagic>,
    #[serde(default)]
    mime_types: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct RawMagic {
    bytes: String,
    #[serde(default)]
    offset: usize,
}

/// Known file-type signatures: extensions, magic bytes at offsets, and mime
/// types, keyed by type name with extension aliases.
#[derive(Debug, Clone)]
pub struct SignatureTable {
    entries: HashMap<String, SignatureEntry>,
    /// extension (lowercase) -> key in `entries`
    by_extension: HashMap<String, String>,
}

impl SignatureTable {
    /// The table compiled into the binary.
    pub fn bundled() -> &'static SignatureTable {
        static TABLE: OnceLock<SignatureTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            SignatureTable::from_toml_str(BUNDLED).expect("bundled signature table is valid")
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, SignatureError> {
        let raw = std::fs::read_to_string(path)?;
        Self::from_toml_str(&raw)
    }

    pub fn from_toml_str(raw: &str) -> Result<Self, SignatureError> {
        let parsed: RawTable = toml::from_str(raw)?;
        let mut entries = HashMap::new();
        let mut by_extension = HashMap::new();
        for (key, raw_entry) in parsed.types {
            if raw_entry.extensions.is_empty() {
                return Err(SignatureError::Entry(key, "no extensions listed".into()));
            }
            let mut magic = Vec::with_capacity(raw_entry.magic.len());
            for m in raw_entry.magic {
                let bytes = hex::decode(m.bytes.trim()).map_err(|e| {
                    SignatureError::Entry(key.clone(), format!("bad magic hex: {e}"))
                })?;
                if bytes.is_empty() {
                    return Err(SignatureError::Entry(key.clone(), "empty magic bytes".into()));
                }
                magic.push(MagicSignature {
                    offset: m.offset,
                    bytes,
                });
            }
            let extensions: Vec<String> = raw_entry
                .extensions
                .iter()
                .map(|e| e.to_ascii_lowercase())
                .collect();
            for ext in &extensions {
                by_extension.insert(ext.clone(), key.clone());
            }
            by_extension.entry(key.to_ascii_lowercase()).or_insert_with(|| key.clone());
            entries.insert(
                key,
                SignatureEntry {
                    extensions,
                    magic,
                    mime_types: raw_entry.mime_types,
                },
            );
        }
        Ok(SignatureTable {
            entries,
            by_extension,
        })
    }

    /// Looks up a type by name or by any of its extensions, case-insensitive.
    pub fn lookup(&self, ext_or_key: &str) -> Option<&SignatureEntry> {
        let needle = ext_or_key.to_ascii_lowercase();
        let key = self.by_extension.get(&needle)?;
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest `offset + bytes.len()` over every signature in the table: the
    /// number of leading bytes needed to test all signatures.
    pub fn max_probe_len(&self) -> usize {
        self.entries
            .values()
            .flat_map(|e| e.magic.iter())
            .map(|m| m.offset + m.bytes.len())
            .max()
            .unwrap_or(0)
    }
}

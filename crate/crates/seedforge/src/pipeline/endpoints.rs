//! Service endpoint overrides, loaded from `endpoints.toml` in a fixtures
//! directory. Every field is optional; unset fields fall back to the live
//! defaults (or to a disabled/unreachable endpoint in fixture mode, so a
//! fixture run never talks to the open internet).

use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

pub const ENDPOINTS_FILE: &str = "endpoints.toml";

/// Base URL guaranteed to refuse connections immediately; used in fixture
/// mode for services the fixtures do not provide.
pub const UNREACHABLE: &str = "http://127.0.0.1:1";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Endpoints {
    /// Code-hosting search API root.
    pub github_api: Option<String>,
    /// Web search engine endpoint.
    pub web_search: Option<String>,
    /// Search endpoint for the feature module; defaults to `web_search`.
    pub feature_search: Option<String>,
    /// Bugzilla instance root. In fixture mode, unset disables the tracker.
    pub bugzilla: Option<String>,
    /// Launchpad API root. In fixture mode, unset disables the tracker.
    pub launchpad: Option<String>,
    pub launchpad_project: Option<String>,
    pub commoncrawl_index: Option<String>,
    pub commoncrawl_archive: Option<String>,
    /// Crawl snapshot id for index queries.
    pub crawl_id: Option<String>,
    /// Per-host crawl delay; fixtures usually set 0.
    pub politeness_ms: Option<u64>,
    /// Search/tracker results taken per query.
    pub results_per_query: Option<usize>,
    /// Common Crawl record cap per mime type.
    pub per_mime_limit: Option<usize>,
}

#[derive(Debug, Error)]
pub enum EndpointsError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
}

impl Endpoints {
    /// Reads `endpoints.toml` from a fixtures directory; a missing file
    /// yields the all-default value.
    pub fn from_fixtures_dir(dir: &Path) -> Result<Self, EndpointsError> {
        let path = dir.join(ENDPOINTS_FILE);
        if !path.exists() {
            return Ok(Endpoints::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|source| EndpointsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| EndpointsError::Parse {
            path: path.display().to_string(),
            source,
        })
    }
}

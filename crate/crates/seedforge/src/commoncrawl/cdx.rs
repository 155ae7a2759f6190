//! CDX-style HTTP index client: JSON-lines lookups filtered to an exact
//! recorded mime type.

use super::{CommonCrawlError, CrawlRecordRef, IndexBackend};
use crate::budget::Budget;
use crate::fetch::{urlencode, FetchClient};
use serde_json::Value;
use std::time::Duration;

const INDEX_BODY_CAP: u64 = 64 * 1024 * 1024;
/// Retries after the initial attempt before the module gives up.
const INDEX_RETRIES: u32 = 3;

pub struct CdxIndexClient {
    index_base: String,
    crawl_id: String,
    url_pattern: String,
}

impl CdxIndexClient {
    pub fn new(index_base: &str, crawl_id: &str, url_pattern: &str) -> Self {
        CdxIndexClient {
            index_base: index_base.trim_end_matches('/').to_string(),
            crawl_id: crawl_id.to_string(),
            url_pattern: url_pattern.to_string(),
        }
    }

    fn query_url(&self, mime: &str, limit: usize) -> String {
        format!(
            "{}/{}-index?url={}&output=json&filter={}&limit={}",
            self.index_base,
            self.crawl_id,
            urlencode(&self.url_pattern),
            urlencode(&format!("mime:{mime}")),
            limit
        )
    }
}

impl IndexBackend for CdxIndexClient {
    /// Fetches index rows for `mime`, retrying transient failures, then
    /// parses JSON lines. Server-side filtering is advisory; rows are
    /// re-checked for exact mime equality here.
    fn lookup(
        &self,
        mime: &str,
        limit: usize,
        http: &FetchClient,
        budget: &Budget,
    ) -> Result<Vec<CrawlRecordRef>, CommonCrawlError> {
        let url = self.query_url(mime, limit);
        let mut last_error = String::new();
        for attempt in 0..=INDEX_RETRIES {
            if attempt > 0 {
                let pause = Duration::from_millis(250 << (attempt - 1));
                std::thread::sleep(pause.min(budget.remaining()));
            }
            if budget.exhausted() {
                last_error = "budget exhausted".to_string();
                break;
            }
            match http.get(&url, budget, INDEX_BODY_CAP) {
                Ok(resp) => {
                    let body = String::from_utf8_lossy(&resp.bytes);
                    return Ok(parse_index_lines(&body, mime, limit));
                }
                Err(e) => {
                    log::warn!("cdx: attempt {} for mime {mime} failed: {e}", attempt + 1);
                    last_error = e.to_string();
                }
            }
        }
        Err(CommonCrawlError::IndexUnavailable {
            attempts: INDEX_RETRIES + 1,
            last_error,
        })
    }
}

/// Parses CDX JSON lines into record refs. Rows with a different mime,
/// missing fields, or invalid offsets/lengths are skipped. Numeric fields
/// arrive as strings or numbers depending on the server.
pub(crate) fn parse_index_lines(body: &str, mime: &str, limit: usize) -> Vec<CrawlRecordRef> {
    let mut records = Vec::new();
    for line in body.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if records.len() >= limit {
            break;
        }
        let Ok(row) = serde_json::from_str::<Value>(line) else {
            log::debug!("cdx: unparsable index line skipped");
            continue;
        };
        let row_mime = row.get("mime").and_then(Value::as_str).unwrap_or_default();
        if row_mime != mime {
            continue;
        }
        let (Some(url), Some(filename)) = (
            row.get("url").and_then(Value::as_str),
            row.get("filename").and_then(Value::as_str),
        ) else {
            log::debug!("cdx: index line missing url/filename skipped");
            continue;
        };
        let (Some(offset), Some(length)) = (
            lenient_u64(row.get("offset")),
            lenient_u64(row.get("length")),
        ) else {
            log::debug!("cdx: index line with bad offset/length skipped");
            continue;
        };
        if length == 0 {
            continue;
        }
        records.push(CrawlRecordRef {
            archive_path: filename.to_string(),
            byte_offset: offset,
            record_length: length,
            url: url.to_string(),
            content_mime_type: row_mime.to_string(),
        });
    }
    records
}

fn lenient_u64(v: Option<&Value>) -> Option<u64> {
    match v? {
        Value::Number(n) => n.as_u64(),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

//! Bugzilla-style REST client: quicksearch for bugs, per-bug attachment
//! metadata, base64-encoded attachment bodies.

use super::{AttachmentRef, BugReportRef, Tracker, TrackerClient, TrackerError, MAX_SEARCH_PAGES};
use crate::budget::Budget;
use crate::fetch::{urlencode, FetchClient};
use base64::Engine as _;
use serde_json::Value;

/// Cap on an API response body (bug lists and base64 payloads).
const API_BODY_CAP: u64 = 64 * 1024 * 1024;

pub struct BugzillaClient {
    base: String,
}

impl BugzillaClient {
    /// `base` is the instance root, e.g. `https://bugzilla.redhat.com`.
    pub fn new(base: &str) -> Self {
        BugzillaClient {
            base: base.trim_end_matches('/').to_string(),
        }
    }

    /// One search page: parsed records plus the raw row count, which drives
    /// the next offset (malformed rows still advance the cursor).
    fn search_page(
        &self,
        query: &str,
        want: usize,
        offset: usize,
        http: &FetchClient,
        budget: &Budget,
    ) -> Result<(Vec<(u64, String)>, usize), TrackerError> {
        let url = format!(
            "{}/rest/bug?quicksearch={}&include_fields=id,summary&limit={}&offset={}",
            self.base,
            urlencode(query),
            want,
            offset
        );
        let resp = http.get(&url, budget, API_BODY_CAP)?;
        let body: Value = serde_json::from_slice(&resp.bytes)
            .map_err(|e| TrackerError::Malformed(format!("bug search: {e}")))?;
        let Some(bugs) = body.get("bugs").and_then(Value::as_array) else {
            return Err(TrackerError::Malformed(
                "bug search: missing \"bugs\" array".to_string(),
            ));
        };
        let mut page = Vec::new();
        for bug in bugs {
            let Some(id) = bug.get("id").and_then(Value::as_u64) else {
                log::debug!("bugzilla: bug record without numeric id skipped");
                continue;
            };
            let summary = bug
                .get("summary")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            page.push((id, summary));
        }
        Ok((page, bugs.len()))
    }

    fn attachment_metadata(
        &self,
        bug_id: u64,
        http: &FetchClient,
        budget: &Budget,
    ) -> Result<Vec<AttachmentRef>, TrackerError> {
        let url = format!(
            "{}/rest/bug/{}/attachment?exclude_fields=data",
            self.base, bug_id
        );
        let resp = http.get(&url, budget, API_BODY_CAP)?;
        let body: Value = serde_json::from_slice(&resp.bytes)
            .map_err(|e| TrackerError::Malformed(format!("attachment metadata: {e}")))?;
        let list = body
            .get("bugs")
            .and_then(|b| b.get(bug_id.to_string()))
            .and_then(Value::as_array);
        let Some(list) = list else {
            return Ok(Vec::new());
        };
        let mut refs = Vec::new();
        for att in list {
            let Some(id) = att.get("id").and_then(Value::as_u64) else {
                log::debug!("bugzilla: attachment record without id on bug {bug_id}; skipped");
                continue;
            };
            refs.push(AttachmentRef {
                id: id.to_string(),
                filename: att
                    .get("file_name")
                    .and_then(Value::as_str)
                    .unwrap_or_default()
                    .to_string(),
                mime_type: att
                    .get("content_type")
                    .and_then(Value::as_str)
                    .map(str::to_string),
                size_bytes: att.get("size").and_then(Value::as_u64),
                download_url: None,
            });
        }
        Ok(refs)
    }
}

impl TrackerClient for BugzillaClient {
    fn tracker(&self) -> Tracker {
        Tracker::Bugzilla
    }

    fn search(
        &self,
        query: &str,
        limit: usize,
        http: &FetchClient,
        budget: &Budget,
    ) -> Result<Vec<BugReportRef>, TrackerError> {
        let mut bugs: Vec<(u64, String)> = Vec::new();
        let mut offset = 0;
        for _ in 0..MAX_SEARCH_PAGES {
            if bugs.len() >= limit || budget.exhausted() {
                break;
            }
            let (page, raw_rows) =
                self.search_page(query, limit - bugs.len(), offset, http, budget)?;
            if raw_rows == 0 {
                break;
            }
            offset += raw_rows;
            bugs.extend(page);
        }
        bugs.truncate(limit);

        let mut refs = Vec::new();
        for (id, summary) in bugs {
            if budget.exhausted() {
                break;
            }
            let attachment_refs = match self.attachment_metadata(id, http, budget) {
                Ok(refs) => refs,
                Err(e) => {
                    log::warn!("bugzilla: attachment metadata for bug {id} failed: {e}");
                    Vec::new()
                }
            };
            refs.push(BugReportRef {
                tracker: Tracker::Bugzilla,
                bug_id: id.to_string(),
                title: summary,
                attachment_refs,
            });
        }
        Ok(refs)
    }

    fn download(
        &self,
        _bug: &BugReportRef,
        attachment: &AttachmentRef,
        http: &FetchClient,
        budget: &Budget,
        max_bytes: u64,
    ) -> Result<Vec<u8>, TrackerError> {
        let url = format!(
            "{}/rest/bug/attachment/{}?include_fields=data",
            self.base, attachment.id
        );
        // base64 inflates by 4/3; fetch enough to decode max_bytes + 1 so an
        // oversize body is still detectable downstream.
        let cap = (max_bytes / 3 + 2) * 4 + 1024;
        let resp = http.get(&url, budget, cap.min(API_BODY_CAP))?;
        let body: Value = serde_json::from_slice(&resp.bytes)
            .map_err(|e| TrackerError::Malformed(format!("attachment fetch: {e}")))?;
        let data = body
            .get("attachments")
            .and_then(|a| a.get(&attachment.id))
            .and_then(|a| a.get("data"))
            .and_then(Value::as_str)
            .ok_or_else(|| {
                TrackerError::Malformed(format!("attachment {} has no data field", attachment.id))
            })?;
        let compact: String = data.chars().filter(|c| !c.is_whitespace()).collect();
        base64::engine::general_purpose::STANDARD
            .decode(compact.as_bytes())
            .map_err(|e| TrackerError::Malformed(format!("attachment {}: {e}", attachment.id)))
    }

    fn bug_url(&self, bug: &BugReportRef) -> String {
        format!("{}/show_bug.cgi?id={}", self.base, bug.bug_id)
    }
}

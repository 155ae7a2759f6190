//! Launchpad-style API client: bug-task search on a project, attachment
//! collections per bug, direct download links.

use super::{AttachmentRef, BugReportRef, Tracker, TrackerClient, TrackerError, MAX_SEARCH_PAGES};
use crate::budget::Budget;
use crate::fetch::{urlencode, FetchClient};
use serde_json::Value;

const API_BODY_CAP: u64 = 16 * 1024 * 1024;

pub struct LaunchpadClient {
    base: String,
    project: String,
}

impl LaunchpadClient {
    /// `base` is the API root (e.g. `https://api.launchpad.net/1.0`);
    /// `project` the pillar whose bug tasks are searched.
    pub fn new(base: &str, project: &str) -> Self {
        LaunchpadClient {
            base: base.trim_end_matches('/').to_string(),
            project: project.to_string(),
        }
    }

    fn get_json(
        &self,
        url: &str,
        http: &FetchClient,
        budget: &Budget,
    ) -> Result<Value, TrackerError> {
        let resp = http.get(url, budget, API_BODY_CAP)?;
        serde_json::from_slice(&resp.bytes)
            .map_err(|e| TrackerError::Malformed(format!("launchpad response: {e}")))
    }

    fn attachment_metadata(
        &self,
        bug_id: &str,
        http: &FetchClient,
        budget: &Budget,
    ) -> Result<Vec<AttachmentRef>, TrackerError> {
        let url = format!("{}/bugs/{}/attachments", self.base, bug_id);
        let body = self.get_json(&url, http, budget)?;
        let Some(entries) = body.get("entries").and_then(Value::as_array) else {
            return Ok(Vec::new());
        };
        let mut refs = Vec::new();
        for entry in entries {
            let Some(self_link) = entry.get("self_link").and_then(Value::as_str) else {
                log::debug!("launchpad: attachment without self_link on bug {bug_id}; skipped");
                continue;
            };
            let id = trailing_segment(self_link).to_string();
            let data_link = entry
                .get("data_link")
                .and_then(Value::as_str)
                .map(str::to_string)
                .unwrap_or_else(|| format!("{}/data", self_link.trim_end_matches('/')));
            let filename = entry
                .get("title")
                .and_then(Value::as_str)
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .unwrap_or_else(|| trailing_segment(&data_link).to_string());
            // Launchpad does not expose size or mime type before download.
            refs.push(AttachmentRef {
                id,
                filename,
                mime_type: None,
                size_bytes: None,
                download_url: Some(data_link),
            });
        }
        Ok(refs)
    }
}

impl TrackerClient for LaunchpadClient {
    fn tracker(&self) -> Tracker {
        Tracker::Launchpad
    }

    fn search(
        &self,
        query: &str,
        limit: usize,
        http: &FetchClient,
        budget: &Budget,
    ) -> Result<Vec<BugReportRef>, TrackerError> {
        let mut tasks: Vec<(String, String)> = Vec::new(); // (bug_id, title)
        let mut next = Some(format!(
            "{}/{}?ws.op=searchTasks&text={}&ws.size={}",
            self.base,
            self.project,
            urlencode(query),
            limit.min(75)
        ));
        for _ in 0..MAX_SEARCH_PAGES {
            let Some(url) = next.take() else { break };
            if tasks.len() >= limit || budget.exhausted() {
                break;
            }
            let body = self.get_json(&url, http, budget)?;
            let Some(entries) = body.get("entries").and_then(Value::as_array) else {
                return Err(TrackerError::Malformed(
                    "task search: missing \"entries\" array".to_string(),
                ));
            };
            for entry in entries {
                let Some(bug_link) = entry.get("bug_link").and_then(Value::as_str) else {
                    log::debug!("launchpad: task without bug_link skipped");
                    continue;
                };
                let title = entry
                    .get("title")
                    .and_then(Value::as_str)
                    .unwrap_or_default()
                    .to_string();
                tasks.push((trailing_segment(bug_link).to_string(), title));
            }
            next = body
                .get("next_collection_link")
                .and_then(Value::as_str)
                .map(str::to_string);
        }
        tasks.truncate(limit);

        let mut refs = Vec::new();
        let mut seen_bugs = std::collections::HashSet::new();
        for (bug_id, title) in tasks {
            if !seen_bugs.insert(bug_id.clone()) {
                continue; // multiple tasks can point at one bug
            }
            if budget.exhausted() {
                break;
            }
            let attachment_refs = match self.attachment_metadata(&bug_id, http, budget) {
                Ok(refs) => refs,
                Err(e) => {
                    log::warn!("launchpad: attachments for bug {bug_id} failed: {e}");
                    Vec::new()
                }
            };
            refs.push(BugReportRef {
                tracker: Tracker::Launchpad,
                bug_id,
                title,
                attachment_refs,
            });
        }
        Ok(refs)
    }

    fn download(
        &self,
        bug: &BugReportRef,
        attachment: &AttachmentRef,
        http: &FetchClient,
        budget: &Budget,
        max_bytes: u64,
    ) -> Result<Vec<u8>, TrackerError> {
        let url = attachment.download_url.clone().unwrap_or_else(|| {
            format!(
                "{}/bugs/{}/+attachment/{}/data",
                self.base, bug.bug_id, attachment.id
            )
        });
        // fetch one byte past the cap so oversize bodies stay detectable
        let resp = http.get(&url, budget, max_bytes + 1)?;
        Ok(resp.bytes)
    }

    fn bug_url(&self, bug: &BugReportRef) -> String {
        format!("{}/bugs/{}", self.base, bug.bug_id)
    }
}

fn trailing_segment(url: &str) -> &str {
    url.trim_end_matches('/')
        .rsplit('/')
        .next()
        .unwrap_or_default()
}

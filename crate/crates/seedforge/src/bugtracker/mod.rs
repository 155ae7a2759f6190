//! Bug-tracker harvesting: search Launchpad-style and Bugzilla-style
//! trackers for reports whose attachments match the target type, then
//! download and validate the attachments.

mod bugzilla;
mod launchpad;

pub use bugzilla::BugzillaClient;
pub use launchpad::LaunchpadClient;

use crate::budget::Budget;
use crate::corpus::{
    validate_file, FileTypeSpec, SeedFile, SourceModule, Subcorpus, SubcorpusStats,
    ValidationOutcome,
};
use crate::fetch::{FetchClient, FetchError};
use crate::querygen::QueryPlan;
use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Mutex;
use thiserror::Error;

/// The tracker families supported out of the box. Each gets a client
/// implementing [`TrackerClient`]; the pipeline never branches on this
/// beyond labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tracker {
    Launchpad,
    Bugzilla,
}

impl fmt::Display for Tracker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tracker::Launchpad => write!(f, "launchpad"),
            Tracker::Bugzilla => write!(f, "bugzilla"),
        }
    }
}

/// Attachment metadata as reported by the tracker. Size and mime type are
/// optional because not every tracker exposes them before download.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttachmentRef {
    pub id: String,
    pub filename: String,
    pub mime_type: Option<String>,
    pub size_bytes: Option<u64>,
    /// Direct download URL when the tracker provides one; otherwise the
    /// client derives it from the id.
    pub download_url: Option<String>,
}

/// One bug report with its attachment metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugReportRef {
    pub tracker: Tracker,
    pub bug_id: String,
    pub title: String,
    pub attachment_refs: Vec<AttachmentRef>,
}

#[derive(Debug, Error)]
pub enum TrackerError {
    #[error("http: {0}")]
    Http(#[from] FetchError),
    #[error("malformed tracker response: {0}")]
    Malformed(String),
}

/// One tracker behind a uniform interface: search returns bug refs with
/// attachment metadata populated; download retrieves one attachment body.
pub trait TrackerClient: Send + Sync {
    fn tracker(&self) -> Tracker;
    fn search(
        &self,
        query: &str,
        limit: usize,
        http: &FetchClient,
        budget: &Budget,
    ) -> Result<Vec<BugReportRef>, TrackerError>;
    fn download(
        &self,
        bug: &BugReportRef,
        attachment: &AttachmentRef,
        http: &FetchClient,
        budget: &Budget,
        max_bytes: u64,
    ) -> Result<Vec<u8>, TrackerError>;
    /// Human-facing bug URL; recorded as the seed's origin.
    fn bug_url(&self, bug: &BugReportRef) -> String;
}

#[derive(Debug, Clone)]
pub struct TrackerConfig {
    /// Bugzilla instance root (the client appends `/rest/...`). `None`
    /// disables the tracker.
    pub bugzilla_base: Option<String>,
    /// Launchpad API root, e.g. `https://api.launchpad.net/1.0`. `None`
    /// disables the tracker.
    pub launchpad_base: Option<String>,
    /// Launchpad target whose bug tasks are searched.
    pub launchpad_project: String,
    /// Result cap per query per tracker.
    pub results_per_query: usize,
    /// Attachment download workers per tracker.
    pub download_workers: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            bugzilla_base: Some("https://bugzilla.redhat.com".to_string()),
            launchpad_base: Some("https://api.launchpad.net/1.0".to_string()),
            launchpad_project: "ubuntu".to_string(),
            results_per_query: 50,
            download_workers: 8,
        }
    }
}

/// Maximum pages requested per search before giving up on a tracker that
/// keeps paginating.
pub(crate) const MAX_SEARCH_PAGES: usize = 20;

/// Runs every plan query against one tracker, skipping failed queries.
pub fn search_tracker(
    client: &dyn TrackerClient,
    queries: &[String],
    limit: usize,
    http: &FetchClient,
    budget: &Budget,
) -> Vec<BugReportRef> {
    let mut refs = Vec::new();
    for query in queries {
        if budget.exhausted() {
            log::warn!("{}: budget exhausted; skipping remaining queries", client.tracker());
            break;
        }
        match client.search(query, limit, http, budget) {
            Ok(mut found) => {
                log::debug!("{}: {:?} -> {} bugs", client.tracker(), query, found.len());
                refs.append(&mut found);
            }
            Err(e) => log::warn!("{}: query {query:?} failed: {e}", client.tracker()),
        }
    }
    refs
}

/// Downloads and validates the attachments of `refs` with bounded worker
/// parallelism. Attachments are deduplicated by id before download, and a
/// metadata size above `max_file_size` skips the download entirely.
pub fn fetch_attachments(
    client: &dyn TrackerClient,
    refs: &[BugReportRef],
    spec: &FileTypeSpec,
    http: &FetchClient,
    budget: &Budget,
    max_file_size: u64,
    workers: usize,
) -> (Vec<SeedFile>, SubcorpusStats) {
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut queue: VecDeque<(&BugReportRef, &AttachmentRef)> = VecDeque::new();
    let mut stats = SubcorpusStats::default();
    for bug in refs {
        for att in &bug.attachment_refs {
            if !seen_ids.insert(att.id.clone()) {
                continue;
            }
            if att.size_bytes.map_or(false, |s| s > max_file_size) {
                log::debug!(
                    "{}: attachment {} ({} bytes) exceeds {} byte cap; not downloaded",
                    client.tracker(),
                    att.id,
                    att.size_bytes.unwrap_or(0),
                    max_file_size
                );
                stats.rejected += 1;
                continue;
            }
            queue.push_back((bug, att));
        }
    }

    let queue = Mutex::new(queue);
    let collected: Mutex<(Vec<SeedFile>, SubcorpusStats)> = Mutex::new((Vec::new(), stats));
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1) {
            scope.spawn(|| loop {
                if budget.exhausted() {
                    return;
                }
                let Some((bug, att)) = queue.lock().unwrap().pop_front() else {
                    return;
                };
                let body = match client.download(bug, att, http, budget, max_file_size) {
                    Ok(body) => body,
                    Err(e) => {
                        log::warn!(
                            "{}: attachment {} download failed: {e}",
                            client.tracker(),
                            att.id
                        );
                        continue;
                    }
                };
                let mut guard = collected.lock().unwrap();
                guard.1.fetched += 1;
                guard.1.bytes_downloaded += body.len() as u64;
                if body.len() as u64 > max_file_size {
                    guard.1.rejected += 1;
                    continue;
                }
                match validate_file(spec, &att.filename, &body) {
                    ValidationOutcome::Accepted(validation) => {
                        let file = SeedFile::new(
                            body,
                            SourceModule::BugTracker,
                            client.bug_url(bug),
                            validation,
                        );
                        guard.1.validated += 1;
                        guard.0.push(file);
                    }
                    ValidationOutcome::Rejected => guard.1.rejected += 1,
                }
            });
        }
    });
    collected.into_inner().unwrap()
}

/// Runs the module: both trackers concurrently, each searching every plan
/// query and harvesting its attachments.
pub fn run_bugtracker(
    spec: &FileTypeSpec,
    plan: &QueryPlan,
    config: &TrackerConfig,
    http: &FetchClient,
    budget: &Budget,
    max_file_size: u64,
) -> Subcorpus {
    let mut clients: Vec<Box<dyn TrackerClient>> = Vec::new();
    if let Some(base) = &config.bugzilla_base {
        clients.push(Box::new(BugzillaClient::new(base)));
    }
    if let Some(base) = &config.launchpad_base {
        clients.push(Box::new(LaunchpadClient::new(base, &config.launchpad_project)));
    }

    let collected: Mutex<(Vec<SeedFile>, SubcorpusStats)> =
        Mutex::new((Vec::new(), SubcorpusStats::default()));
    std::thread::scope(|scope| {
        for client in &clients {
            scope.spawn(|| {
                let refs = search_tracker(
                    client.as_ref(),
                    &plan.queries,
                    config.results_per_query,
                    http,
                    budget,
                );
                let (files, stats) = fetch_attachments(
                    client.as_ref(),
                    &refs,
                    spec,
                    http,
                    budget,
                    max_file_size,
                    config.download_workers,
                );
                let mut guard = collected.lock().unwrap();
                guard.0.extend(files);
                guard.1.merge(&stats);
            });
        }
    });

    let (files, stats) = collected.into_inner().unwrap();
    Subcorpus::from_collected(SourceModule::BugTracker, files, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{SignatureTable, Validation};
    use crate::testutil::FixtureServer;
    use std::time::Duration;

    const PNG: &[u8] = &[0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 7];

    fn png_spec() -> FileTypeSpec {
        FileTypeSpec::extension("png", SignatureTable::bundled()).unwrap()
    }

    struct FakeTracker {
        refs: Vec<BugReportRef>,
        body: Vec<u8>,
    }

    impl TrackerClient for FakeTracker {
        fn tracker(&self) -> Tracker {
            Tracker::Bugzilla
        }
        fn search(
            &self,
            _query: &str,
            limit: usize,
            _http: &FetchClient,
            _budget: &Budget,
        ) -> Result<Vec<BugReportRef>, TrackerError> {
            Ok(self.refs.iter().take(limit).cloned().collect())
        }
        fn download(
            &self,
            _bug: &BugReportRef,
            _attachment: &AttachmentRef,
            _http: &FetchClient,
            _budget: &Budget,
            _max_bytes: u64,
        ) -> Result<Vec<u8>, TrackerError> {
            Ok(self.body.clone())
        }
        fn bug_url(&self, bug: &BugReportRef) -> String {
            format!("https://tracker.example/bug/{}", bug.bug_id)
        }
    }

    fn attachment(id: &str, filename: &str, size: Option<u64>) -> AttachmentRef {
        AttachmentRef {
            id: id.to_string(),
            filename: filename.to_string(),
            mime_type: None,
            size_bytes: size,
            download_url: None,
        }
    }

    fn bug(id: &str, atts: Vec<AttachmentRef>) -> BugReportRef {
        BugReportRef {
            tracker: Tracker::Bugzilla,
            bug_id: id.to_string(),
            title: format!("bug {id}"),
            attachment_refs: atts,
        }
    }

    #[test]
    fn duplicate_attachment_ids_downloaded_once() {
        let tracker = FakeTracker {
            refs: vec![],
            body: PNG.to_vec(),
        };
        let refs = vec![
            bug("1", vec![attachment("a", "crash.png", None)]),
            bug("2", vec![attachment("a", "crash.png", None)]),
            bug("3", vec![attachment("b", "other.png", None)]),
        ];
        let budget = Budget::new(Duration::from_secs(120));
        let (files, stats) = fetch_attachments(
            &tracker,
            &refs,
            &png_spec(),
            &FetchClient::new(),
            &budget,
            1 << 20,
            4,
        );
        assert_eq!(stats.fetched, 2, "one download per distinct attachment id");
        assert_eq!(files.len(), 2);
    }

    #[test]
    fn metadata_size_precheck_skips_download() {
        let tracker = FakeTracker {
            refs: vec![],
            body: PNG.to_vec(),
        };
        let refs = vec![bug(
            "1",
            vec![
                attachment("big", "huge.png", Some(2 * 1024 * 1024)),
                attachment("ok", "fine.png", Some(9)),
            ],
        )];
        let budget = Budget::new(Duration::from_secs(120));
        let (files, stats) = fetch_attachments(
            &tracker,
            &refs,
            &png_spec(),
            &FetchClient::new(),
            &budget,
            1024 * 1024,
            4,
        );
        assert_eq!(stats.fetched, 1, "oversize attachment never downloaded");
        assert_eq!(stats.rejected, 1);
        assert_eq!(files.len(), 1);
    }

    #[test]
    fn magic_match_without_extension_accepted() {
        let tracker = FakeTracker {
            refs: vec![],
            body: PNG.to_vec(),
        };
        let refs = vec![bug("7", vec![attachment("x", "poc", None)])];
        let budget = Budget::new(Duration::from_secs(120));
        let (files, _) = fetch_attachments(
            &tracker,
            &refs,
            &png_spec(),
            &FetchClient::new(),
            &budget,
            1 << 20,
            2,
        );
        assert_eq!(files.len(), 1);
        assert_eq!(files[0].validation, Validation::ByMagic);
        assert_eq!(files[0].origin_url, "https://tracker.example/bug/7");
        assert_eq!(files[0].source_module, SourceModule::BugTracker);
    }

    #[test]
    fn non_matching_attachment_rejected() {
        let tracker = FakeTracker {
            refs: vec![],
            body: b"#!/bin/sh\necho hi\n".to_vec(),
        };
        let refs = vec![bug("9", vec![attachment("s", "script.sh", None)])];
        let budget = Budget::new(Duration::from_secs(120));
        let (files, stats) = fetch_attachments(
            &tracker,
            &refs,
            &png_spec(),
            &FetchClient::new(),
            &budget,
            1 << 20,
            2,
        );
        assert!(files.is_empty());
        assert_eq!(stats.rejected, 1);
        assert_eq!(stats.fetched, 1);
    }

    #[test]
    fn run_queries_both_trackers_and_merges() {
        let server = FixtureServer::start();
        // --- bugzilla fixture ---
        server.route_dyn("/bz/rest/bug", |target| {
            if target.contains("offset=0") {
                crate::testutil::CannedResponse::json(
                    r#"{"bugs":[{"id":11,"summary":"crash in decoder"}]}"#.to_string(),
                )
            } else {
                crate::testutil::CannedResponse::json(r#"{"bugs":[]}"#.to_string())
            }
        });
        server.route_json(
            "/bz/rest/bug/11/attachment",
            r#"{"bugs":{"11":[{"id":21,"file_name":"crash.png","content_type":"image/png","size":9}]}}"#,
        );
        let b64 = {
            use base64::Engine as _;
            base64::engine::general_purpose::STANDARD.encode(PNG)
        };
        server.route_json(
            "/bz/rest/bug/attachment/21",
            &format!(r#"{{"attachments":{{"21":{{"data":"{b64}"}}}}}}"#),
        );
        // --- launchpad fixture ---
        let lp = |p: &str| format!("{}/lp{}", server.base_url(), p);
        server.route_json(
            "/lp/ubuntu",
            &format!(
                r#"{{"entries":[{{"bug_link":"{}","title":"Bug #31 in pkg: \"boom\""}}]}}"#,
                lp("/bugs/31")
            ),
        );
        server.route_json(
            "/lp/bugs/31/attachments",
            &format!(
                r#"{{"entries":[{{"self_link":"{}","title":"repro.png","data_link":"{}"}}]}}"#,
                lp("/bugs/31/+attachment/41"),
                lp("/bugs/31/+attachment/41/data")
            ),
        );
        server.route("/lp/bugs/31/+attachment/41/data", "image/png", PNG.to_vec());

        let config = TrackerConfig {
            bugzilla_base: Some(format!("{}/bz", server.base_url())),
            launchpad_base: Some(format!("{}/lp", server.base_url())),
            launchpad_project: "ubuntu".to_string(),
            results_per_query: 50,
            download_workers: 4,
        };
        let plan = QueryPlan {
            module: SourceModule::BugTracker,
            queries: vec!["png crash".to_string()],
            prompt_used: String::new(),
            model_name: "test".to_string(),
        };
        let budget = Budget::new(Duration::from_secs(120));
        let out = run_bugtracker(
            &png_spec(),
            &plan,
            &config,
            &FetchClient::new(),
            &budget,
            1 << 20,
        );
        assert_eq!(out.module, SourceModule::BugTracker);
        // the two trackers serve byte-identical attachments → dedup to 1
        assert_eq!(out.files.len(), 1);
        assert_eq!(out.stats.fetched, 2);
        assert_eq!(out.stats.validated, 2);
    }
}

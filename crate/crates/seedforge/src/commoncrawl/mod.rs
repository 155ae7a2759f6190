//! Common Crawl harvesting: exact-mime lookups against a CDX-style index,
//! then byte-range fetches of the referenced archive records. The module
//! issues no language-model calls — its inputs are the spec's mime types —
//! so its output is fully deterministic for a fixed index and archive.

mod archive;
mod cdx;
pub mod warc;

pub use archive::ArchiveFetcher;
pub use cdx::CdxIndexClient;

use crate::budget::Budget;
use crate::corpus::{
    validate_file, FileTypeSpec, SeedFile, SourceModule, Subcorpus, SubcorpusStats,
    ValidationOutcome,
};
use crate::fetch::{FetchClient, FetchError};
use std::collections::HashSet;
use std::sync::Mutex;
use thiserror::Error;

/// Headroom over the payload cap for WARC and HTTP headers when bounding
/// decompression.
const HEADER_HEADROOM: u64 = 64 * 1024;

/// One archived response, as located by the index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrawlRecordRef {
    /// Archive file path relative to the archive base.
    pub archive_path: String,
    pub byte_offset: u64,
    /// Compressed record length; always positive.
    pub record_length: u64,
    /// The archived URL; recorded as the seed's origin.
    pub url: String,
    pub content_mime_type: String,
}

#[derive(Debug, Error)]
pub enum CommonCrawlError {
    #[error("index unavailable after {attempts} attempts: {last_error}")]
    IndexUnavailable { attempts: u32, last_error: String },
    #[error("http: {0}")]
    Http(#[from] FetchError),
    #[error("{url} does not support range requests (status {status})")]
    RangeUnsupported { url: String, status: u16 },
    #[error("archive {path}: {source}")]
    Archive {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("record at {url}: {source}")]
    Record {
        url: String,
        #[source]
        source: warc::WarcError,
    },
}

/// Index lookups behind a trait so the CDX HTTP client can be swapped for a
/// columnar-query backend without touching the pipeline.
pub trait IndexBackend: Send + Sync {
    /// Records whose recorded mime type equals `mime` exactly, capped at
    /// `limit`.
    fn lookup(
        &self,
        mime: &str,
        limit: usize,
        http: &FetchClient,
        budget: &Budget,
    ) -> Result<Vec<CrawlRecordRef>, CommonCrawlError>;
}

#[derive(Debug, Clone)]
pub struct CommonCrawlConfig {
    pub index_base: String,
    pub archive_base: String,
    /// Crawl snapshot id, e.g. `CC-MAIN-2025-08`.
    pub crawl_id: String,
    /// URL scope for index queries; the mime filter does the real work.
    pub url_pattern: String,
    /// Record cap per mime type.
    pub per_mime_limit: usize,
    pub download_workers: usize,
}

impl Default for CommonCrawlConfig {
    fn default() -> Self {
        CommonCrawlConfig {
            index_base: "https://index.commoncrawl.org".to_string(),
            archive_base: "https://data.commoncrawl.org".to_string(),
            crawl_id: "CC-MAIN-2025-08".to_string(),
            url_pattern: "*".to_string(),
            per_mime_limit: 5000,
            download_workers: 8,
        }
    }
}

/// Fetches one record and validates its payload. `Ok(None)` means the
/// record was readable but not captured (failed validation or oversize).
pub fn fetch_record(
    record: &CrawlRecordRef,
    spec: &FileTypeSpec,
    fetcher: &ArchiveFetcher,
    http: &FetchClient,
    budget: &Budget,
    max_file_size: u64,
) -> Result<Option<SeedFile>, CommonCrawlError> {
    let raw = fetcher.fetch_raw(record, http, budget)?;
    decode_record(record, &raw, spec, max_file_size)
}

/// Validation half of [`fetch_record`], applied to already-fetched bytes.
fn decode_record(
    record: &CrawlRecordRef,
    raw: &[u8],
    spec: &FileTypeSpec,
    max_file_size: u64,
) -> Result<Option<SeedFile>, CommonCrawlError> {
    let decoded = warc::parse_record(raw, max_file_size + HEADER_HEADROOM).map_err(|source| {
        CommonCrawlError::Record {
            url: record.url.clone(),
            source,
        }
    })?;
    if decoded.payload.len() as u64 > max_file_size {
        log::debug!(
            "commoncrawl: {} payload {} bytes exceeds {} byte cap; skipped",
            record.url,
            decoded.payload.len(),
            max_file_size
        );
        return Ok(None);
    }
    match validate_file(spec, &record.url, &decoded.payload) {
        ValidationOutcome::Accepted(validation) => Ok(Some(SeedFile::new(
            decoded.payload,
            SourceModule::CommonCrawl,
            record.url.clone(),
            validation,
        ))),
        ValidationOutcome::Rejected => Ok(None),
    }
}

/// Runs the module against an arbitrary index backend and archive.
pub fn run_with_backend(
    spec: &FileTypeSpec,
    backend: &dyn IndexBackend,
    fetcher: &ArchiveFetcher,
    config: &CommonCrawlConfig,
    http: &FetchClient,
    budget: &Budget,
    max_file_size: u64,
) -> Subcorpus {
    let mut records: Vec<CrawlRecordRef> = Vec::new();
    let mut seen: HashSet<(String, u64)> = HashSet::new();
    if spec.mime_types.is_empty() {
        log::warn!("commoncrawl: spec has no mime types; nothing to look up");
    }
    for mime in &spec.mime_types {
        if budget.exhausted() {
            log::warn!("commoncrawl: budget exhausted before mime {mime}");
            break;
        }
        match backend.lookup(mime, config.per_mime_limit, http, budget) {
            Ok(found) => {
                log::info!("commoncrawl: {} records for mime {mime}", found.len());
                for record in found {
                    if seen.insert((record.archive_path.clone(), record.byte_offset)) {
                        records.push(record);
                    }
                }
            }
            Err(e) => {
                // the index is the module's one critical dependency
                log::error!("commoncrawl: index lookup for {mime} failed, aborting module: {e}");
                break;
            }
        }
    }

    let queue = Mutex::new(std::collections::VecDeque::from(records));
    let collected: Mutex<(Vec<SeedFile>, SubcorpusStats)> =
        Mutex::new((Vec::new(), SubcorpusStats::default()));
    std::thread::scope(|scope| {
        for _ in 0..config.download_workers.max(1) {
            scope.spawn(|| loop {
                if budget.exhausted() {
                    return;
                }
                let Some(record) = queue.lock().unwrap().pop_front() else {
                    return;
                };
                let raw = match fetcher.fetch_raw(&record, http, budget) {
                    Ok(raw) => raw,
                    Err(e) => {
                        log::warn!("commoncrawl: fetch for {} failed: {e}", record.url);
                        continue;
                    }
                };
                let mut guard = collected.lock().unwrap();
                guard.1.fetched += 1;
                guard.1.bytes_downloaded += raw.len() as u64;
                drop(guard);
                match decode_record(&record, &raw, spec, max_file_size) {
                    Ok(Some(file)) => {
                        let mut guard = collected.lock().unwrap();
                        guard.1.validated += 1;
                        guard.0.push(file);
                    }
                    Ok(None) => collected.lock().unwrap().1.rejected += 1,
                    Err(e) => {
                        log::warn!("commoncrawl: {e}");
                        collected.lock().unwrap().1.rejected += 1;
                    }
                }
            });
        }
    });

    let (files, stats) = collected.into_inner().unwrap();
    Subcorpus::from_collected(SourceModule::CommonCrawl, files, stats)
}

/// Runs the module with the standard CDX index client and archive fetcher.
pub fn run_commoncrawl(
    spec: &FileTypeSpec,
    config: &CommonCrawlConfig,
    http: &FetchClient,
    budget: &Budget,
    max_file_size: u64,
) -> Subcorpus {
    let backend = CdxIndexClient::new(&config.index_base, &config.crawl_id, &config.url_pattern);
    let fetcher = ArchiveFetcher::new(&config.archive_base);
    run_with_backend(spec, &backend, &fetcher, config, http, budget, max_file_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{SignatureTable, Validation};
    use crate::testutil::FixtureServer;
    use std::time::Duration;

    const PNG: &[u8] = &[0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 3, 1, 4];

    fn png_spec() -> FileTypeSpec {
        FileTypeSpec::extension("png", SignatureTable::bundled()).unwrap()
    }

    /// Builds an archive of records and the matching CDX index lines.
    fn fixture_archive(entries: &[(&str, &str, &[u8])]) -> (Vec<u8>, Vec<String>) {
        let mut archive = Vec::new();
        let mut lines = Vec::new();
        for (url, mime, payload) in entries {
            let record = warc::build_response_record(url, mime, payload);
            lines.push(format!(
                r#"{{"url":"{url}","mime":"{mime}","status":"200","length":"{}","offset":"{}","filename":"warc/fix.warc.gz"}}"#,
                record.len(),
                archive.len(),
            ));
            archive.extend_from_slice(&record);
        }
        (archive, lines)
    }

    fn config_for(server: &FixtureServer) -> CommonCrawlConfig {
        CommonCrawlConfig {
            index_base: server.base_url(),
            archive_base: server.base_url(),
            crawl_id: "CC-TEST".to_string(),
            url_pattern: "*".to_string(),
            per_mime_limit: 5000,
            download_workers: 4,
        }
    }

    #[test]
    fn end_to_end_deterministic_over_fixture() {
        let server = FixtureServer::start();
        let (archive, lines) = fixture_archive(&[
            ("http://site/a.png", "image/png", PNG),
            ("http://site/page.html", "text/html", b"<html></html>"),
            ("http://site/b.png", "image/png", b"not really a png"),
        ]);
        server.route("/warc/fix.warc.gz", "application/octet-stream", archive);
        server.route(
            "/CC-TEST-index",
            "application/json",
            lines.join("\n").into_bytes(),
        );

        let budget = Budget::new(Duration::from_secs(120));
        let run = || {
            run_commoncrawl(
                &png_spec(),
                &config_for(&server),
                &FetchClient::new(),
                &budget,
                1 << 20,
            )
        };
        let first = run();
        // html record is mime-filtered out at the index; b.png fails magic
        // but matches by extension
        assert_eq!(first.files.len(), 2);
        assert!(first
            .files
            .iter()
            .all(|f| f.source_module == SourceModule::CommonCrawl));
        assert_eq!(first.stats.fetched, 2);
        assert_eq!(first.stats.validated, 2);

        let second = run();
        assert_eq!(first.files, second.files, "identical fixture, identical output");
    }

    #[test]
    fn corrupt_record_skipped() {
        let server = FixtureServer::start();
        let good = warc::build_response_record("http://site/ok.png", "image/png", PNG);
        let mut archive = vec![0xde, 0xad, 0xbe, 0xef]; // corrupt first record
        let corrupt_len = archive.len();
        archive.extend_from_slice(&good);
        let lines = [
            format!(
                r#"{{"url":"http://site/bad.png","mime":"image/png","length":"{corrupt_len}","offset":"0","filename":"warc/fix.warc.gz"}}"#
            ),
            format!(
                r#"{{"url":"http://site/ok.png","mime":"image/png","length":"{}","offset":"{corrupt_len}","filename":"warc/fix.warc.gz"}}"#,
                good.len()
            ),
        ];
        server.route("/warc/fix.warc.gz", "application/octet-stream", archive);
        server.route("/CC-TEST-index", "application/json", lines.join("\n").into_bytes());

        let budget = Budget::new(Duration::from_secs(120));
        let out = run_commoncrawl(
            &png_spec(),
            &config_for(&server),
            &FetchClient::new(),
            &budget,
            1 << 20,
        );
        assert_eq!(out.files.len(), 1);
        assert_eq!(out.files[0].origin_url, "http://site/ok.png");
        assert_eq!(out.stats.rejected, 1);
    }

    #[test]
    fn oversize_payload_skipped() {
        let server = FixtureServer::start();
        let mut big = PNG.to_vec();
        big.resize(4096, 7);
        let (archive, lines) = fixture_archive(&[("http://site/big.png", "image/png", &big)]);
        server.route("/warc/fix.warc.gz", "application/octet-stream", archive);
        server.route("/CC-TEST-index", "application/json", lines.join("\n").into_bytes());

        let budget = Budget::new(Duration::from_secs(120));
        let out = run_commoncrawl(
            &png_spec(),
            &config_for(&server),
            &FetchClient::new(),
            &budget,
            1024,
        );
        assert!(out.files.is_empty());
        assert_eq!(out.stats.rejected, 1);
    }

    #[test]
    fn index_failure_aborts_module_gracefully() {
        let server = FixtureServer::start();
        server.route_full("/CC-TEST-index", crate::testutil::CannedResponse::status(500));
        let budget = Budget::new(Duration::from_secs(120));
        let out = run_commoncrawl(
            &png_spec(),
            &config_for(&server),
            &FetchClient::new(),
            &budget,
            1 << 20,
        );
        assert!(out.files.is_empty());
        assert_eq!(out.stats.fetched, 0);
    }

    #[test]
    fn fetch_record_single_accepts_magic_only_name() {
        let server = FixtureServer::start();
        // archived URL has no extension; the magic bytes must carry it
        let (archive, _) = fixture_archive(&[("http://site/raw-poc", "image/png", PNG)]);
        let record_len = archive.len() as u64;
        server.route("/warc/fix.warc.gz", "application/octet-stream", archive);
        let record = CrawlRecordRef {
            archive_path: "warc/fix.warc.gz".to_string(),
            byte_offset: 0,
            record_length: record_len,
            url: "http://site/raw-poc".to_string(),
            content_mime_type: "image/png".to_string(),
        };
        let fetcher = ArchiveFetcher::new(&server.base_url());
        let budget = Budget::new(Duration::from_secs(120));
        let file = fetch_record(
            &record,
            &png_spec(),
            &fetcher,
            &FetchClient::new(),
            &budget,
            1 << 20,
        )
        .unwrap()
        .unwrap();
        assert_eq!(file.validation, Validation::ByMagic);
        assert_eq!(file.origin_url, "http://site/raw-poc");
    }

    #[test]
    fn description_mode_has_no_mimes_and_yields_empty() {
        let server = FixtureServer::start();
        let spec = FileTypeSpec::description("php serialized data").unwrap();
        let budget = Budget::new(Duration::from_secs(5));
        let out = run_commoncrawl(
            &spec,
            &config_for(&server),
            &FetchClient::new(),
            &budget,
            1 << 20,
        );
        assert!(out.files.is_empty());
        assert!(server.hit_targets().is_empty(), "no lookups without mime types");
    }
}

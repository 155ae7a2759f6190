use super::{frontier::canonicalize, CrawlConfig, CrawlFrontier, RobotsCache};
use crate::budget::Budget;
use crate::corpus::{
    validate_file, FileTypeSpec, SeedFile, SourceModule, Subcorpus, SubcorpusStats,
    ValidationOutcome,
};
use crate::fetch::FetchClient;
use regex::Regex;
use std::sync::{Mutex, OnceLock};
use url::Url;

/// Breadth-first crawl from `seeds`. Every fetched resource is offered to
/// `validate_file` (name hint = URL path); HTML resources additionally feed
/// links back into the frontier, subject to the config's depth policy. The
/// crawl ends at frontier exhaustion or budget exhaustion, whichever is
/// first.
pub fn crawl(
    module: SourceModule,
    seeds: &[String],
    spec: &FileTypeSpec,
    budget: &Budget,
    config: &CrawlConfig,
    client: &FetchClient,
    max_file_size: u64,
) -> Subcorpus {
    let frontier = CrawlFrontier::new(config.politeness);
    for raw in seeds {
        match canonicalize(raw, None) {
            Some(url) => {
                frontier.push(url, 0);
            }
            None => log::warn!("crawl: unusable seed URL {raw:?}"),
        }
    }

    let robots = RobotsCache::new();
    let collected: Mutex<(Vec<SeedFile>, SubcorpusStats)> =
        Mutex::new((Vec::new(), SubcorpusStats::default()));
    let fetch_cap = config.max_fetch_bytes.max(max_file_size + 1);

    std::thread::scope(|scope| {
        for _ in 0..config.parallelism.max(1) {
            scope.spawn(|| {
                while let Some((url, depth)) = frontier.next(budget.deadline()) {
                    process_url(
                        module,
                        &url,
                        depth,
                        spec,
                        budget,
                        config,
                        client,
                        &robots,
                        &frontier,
                        &collected,
                        max_file_size,
                        fetch_cap,
                    );
                    frontier.done();
                }
            });
        }
    });

    let (files, stats) = collected.into_inner().unwrap();
    Subcorpus::from_collected(module, files, stats)
}

#[allow(clippy::too_many_arguments)]
fn process_url(
    module: SourceModule,
    url: &Url,
    depth: u32,
    spec: &FileTypeSpec,
    budget: &Budget,
    config: &CrawlConfig,
    client: &FetchClient,
    robots: &RobotsCache,
    frontier: &CrawlFrontier,
    collected: &Mutex<(Vec<SeedFile>, SubcorpusStats)>,
    max_file_size: u64,
    fetch_cap: u64,
) {
    if budget.exhausted() {
        return;
    }
    if config.respect_robots && !robots.allowed(client, budget, url) {
        log::debug!("crawl: robots disallows {url}");
        return;
    }
    let result = match client.get(url.as_str(), budget, fetch_cap) {
        Ok(r) => r,
        Err(e) => {
            log::debug!("crawl: fetch failed: {e}");
            return;
        }
    };

    let is_html = result
        .content_type
        .as_deref()
        .map(|ct| ct.to_ascii_lowercase().contains("text/html"))
        .unwrap_or(false)
        || looks_like_html(&result.bytes);

    {
        let mut guard = collected.lock().unwrap();
        guard.1.fetched += 1;
        guard.1.bytes_downloaded += result.bytes.len() as u64;
    }

    // capture decision
    if !result.truncated && result.bytes.len() as u64 <= max_file_size {
        match validate_file(spec, url.path(), &result.bytes) {
            ValidationOutcome::Accepted(validation) => {
                let file = SeedFile::new(
                    result.bytes.clone(),
                    module,
                    url.to_string(),
                    validation,
                );
                let mut guard = collected.lock().unwrap();
                guard.1.validated += 1;
                guard.0.push(file);
            }
            ValidationOutcome::Rejected => {
                collected.lock().unwrap().1.rejected += 1;
            }
        }
    } else {
        log::debug!(
            "crawl: {url} exceeds max file size ({} bytes cap); not captured",
            max_file_size
        );
        collected.lock().unwrap().1.rejected += 1;
    }

    // link expansion
    if is_html && config.max_depth.map_or(true, |limit| depth < limit) {
        let html = String::from_utf8_lossy(&result.bytes);
        for link in extract_links(&html, url) {
            frontier.push(link, depth + 1);
        }
    }
}

/// True when the payload sniffs as an HTML document.
pub fn looks_like_html(bytes: &[u8]) -> bool {
    let head = &bytes[..bytes.len().min(512)];
    let text = String::from_utf8_lossy(head);
    let trimmed = text.trim_start().to_ascii_lowercase();
    trimmed.starts_with("<!doctype html") || trimmed.starts_with("<html") || trimmed.contains("<html")
}

/// Pulls href/src targets out of HTML and resolves them against `base`.
/// Unsupported schemes and unparsable URLs are dropped.
pub fn extract_links(html: &str, base: &Url) -> Vec<Url> {
    static LINK_RE: OnceLock<Regex> = OnceLock::new();
    let re = LINK_RE.get_or_init(|| {
        Regex::new(r#"(?i)\b(?:href|src)\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s"'>]+))"#)
            .expect("link regex compiles")
    });
    let mut out = Vec::new();
    for caps in re.captures_iter(html) {
        let raw = caps
            .get(1)
            .or_else(|| caps.get(2))
            .or_else(|| caps.get(3))
            .map(|m| m.as_str())
            .unwrap_or("");
        if raw.is_empty() {
            continue;
        }
        if let Some(url) = canonicalize(raw, Some(base)) {
            out.push(url);
        }
    }
    out
}

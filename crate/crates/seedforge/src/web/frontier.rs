//! The shared crawl frontier: URL queue, visited set, and per-host
//! politeness, safe for many concurrent workers.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};
use url::Url;

/// Canonical form used for the visited set: fragment dropped, scheme/host
/// normalized by the URL parser. Returns `None` for unsupported schemes.
pub fn canonicalize(raw: &str, base: Option<&Url>) -> Option<Url> {
    let parsed = match base {
        Some(base) => base.join(raw).ok()?,
        None => Url::parse(raw).ok()?,
    };
    if parsed.scheme() != "http" && parsed.scheme() != "https" {
        return None;
    }
    let mut url = parsed;
    url.set_fragment(None);
    Some(url)
}

struct FrontierState {
    queue: VecDeque<(Url, u32)>,
    visited: HashSet<String>,
    host_next_ok: HashMap<String, Instant>,
    in_flight: usize,
}

/// Work queue shared by crawl workers. URLs enter once (visited-set
/// dedup at enqueue time), leave only when their host's politeness window
/// is open, and `in_flight` tracking lets idle workers detect completion.
pub struct CrawlFrontier {
    state: Mutex<FrontierState>,
    cond: Condvar,
    politeness: Duration,
}

impl CrawlFrontier {
    pub fn new(politeness: Duration) -> Self {
        CrawlFrontier {
            state: Mutex::new(FrontierState {
                queue: VecDeque::new(),
                visited: HashSet::new(),
                host_next_ok: HashMap::new(),
                in_flight: 0,
            }),
            cond: Condvar::new(),
            politeness,
        }
    }

    /// Enqueues a URL unless it was already seen. The fragment never
    /// distinguishes two URLs. Returns true when queued.
    pub fn push(&self, mut url: Url, depth: u32) -> bool {
        url.set_fragment(None);
        let key = url.to_string();
        let mut state = self.state.lock().unwrap();
        if !state.visited.insert(key) {
            return false;
        }
        state.queue.push_back((url, depth));
        self.cond.notify_one();
        true
    }

    /// Number of URLs ever enqueued.
    pub fn seen_count(&self) -> usize {
        self.state.lock().unwrap().visited.len()
    }

    /// Takes the next politeness-ready URL. Blocks while the queue is empty
    /// but work is still in flight (more links may arrive), or while only
    /// not-yet-ready hosts are queued. Returns `None` when the crawl is
    /// complete or `deadline` passes.
    pub fn next(&self, deadline: Instant) -> Option<(Url, u32)> {
        let mut state = self.state.lock().unwrap();
        loop {
            let now = Instant::now();
            if now >= deadline {
                return None;
            }

            // first queue entry whose host is ready
            let ready_idx = state.queue.iter().position(|(url, _)| {
                host_of(url)
                    .and_then(|h| state.host_next_ok.get(&h))
                    .map(|&t| t <= now)
                    .unwrap_or(true)
            });
            if let Some(idx) = ready_idx {
                let (url, depth) = state.queue.remove(idx).expect("index in range");
                if let Some(host) = host_of(&url) {
                    state.host_next_ok.insert(host, now + self.politeness);
                }
                state.in_flight += 1;
                return Some((url, depth));
            }

            if state.queue.is_empty() {
                if state.in_flight == 0 {
                    return None; // crawl complete
                }
                // wait for in-flight work to produce links or finish
                let (next_state, _) = self
                    .cond
                    .wait_timeout(state, wait_span(deadline, now))
                    .unwrap();
                state = next_state;
            } else {
                // all queued hosts are cooling down: sleep until the soonest
                let soonest = state
                    .queue
                    .iter()
                    .filter_map(|(url, _)| {
                        host_of(url).and_then(|h| state.host_next_ok.get(&h)).copied()
                    })
                    .min()
                    .unwrap_or(now);
                let span = soonest.saturating_duration_since(now).min(wait_span(deadline, now));
                let (next_state, _) = self
                    .cond
                    .wait_timeout(state, span.max(Duration::from_millis(1)))
                    .unwrap();
                state = next_state;
            }
        }
    }

    /// Marks one unit of work finished; wakes waiters so they can re-check
    /// for completion.
    pub fn done(&self) {
        let mut state = self.state.lock().unwrap();
        state.in_flight = state.in_flight.saturating_sub(1);
        drop(state);
        self.cond.notify_all();
    }
}

fn host_of(url: &Url) -> Option<String> {
    url.host_str().map(|h| {
        match url.port() {
            Some(p) => format!("{h}:{p}"),
            None => h.to_string(),
        }
    })
}

fn wait_span(deadline: Instant, now: Instant) -> Duration {
    deadline
        .saturating_duration_since(now)
        .min(Duration::from_millis(50))
}

//! Minimal robots.txt support: one fetch per origin, `User-agent: *` (or
//! our own agent) groups, prefix-matched `Disallow` rules. Unreachable or
//! unparsable robots files allow everything, per convention.

use crate::budget::Budget;
use crate::fetch::FetchClient;
use std::collections::HashMap;
use std::sync::Mutex;
use url::Url;

const MAX_ROBOTS_BYTES: u64 = 512 * 1024;

#[derive(Debug, Clone, Default)]
struct Rules {
    disallow: Vec<String>,
}

impl Rules {
    fn allows(&self, path: &str) -> bool {
        !self
            .disallow
            .iter()
            .any(|prefix| !prefix.is_empty() && path.starts_with(prefix.as_str()))
    }
}

/// Per-origin robots.txt cache shared by all crawl workers.
#[derive(Default)]
pub struct RobotsCache {
    by_origin: Mutex<HashMap<String, Rules>>,
}

impl RobotsCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// True when `url` may be fetched.
    pub fn allowed(&self, client: &FetchClient, budget: &Budget, url: &Url) -> bool {
        let origin = url.origin().ascii_serialization();
        {
            let cache = self.by_origin.lock().unwrap();
            if let Some(rules) = cache.get(&origin) {
                return rules.allows(url.path());
            }
        }
        let robots_url = format!("{origin}/robots.txt");
        let rules = match client.get(&robots_url, budget, MAX_ROBOTS_BYTES) {
            Ok(result) => parse_robots(&String::from_utf8_lossy(&result.bytes)),
            Err(_) => Rules::default(), // absent/unreachable robots allows all
        };
        let allowed = rules.allows(url.path());
        self.by_origin.lock().unwrap().insert(origin, rules);
        allowed
    }
}

fn parse_robots(text: &str) -> Rules {
    let mut rules = Rules::default();
    let mut group_applies = false;
    let mut in_group_header = false;
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((field, value)) = line.split_once(':') else {
            continue;
        };
        let field = field.trim().to_ascii_lowercase();
        let value = value.trim();
        match field.as_str() {
            "user-agent" => {
                let matches_us =
                    value == "*" || value.to_ascii_lowercase().contains("seedforge");
                if in_group_header {
                    group_applies |= matches_us;
                } else {
                    group_applies = matches_us;
                    in_group_header = true;
                }
            }
            "disallow" => {
                in_group_header = false;
                if group_applies && !value.is_empty() {
                    rules.disallow.push(value.to_string());
                }
            }
            _ => {
                in_group_header = false;
            }
        }
    }
    rules
}

//! Turns raw model output into a clean query list.

/// Queries longer than this are truncated (with a warning).
pub const MAX_QUERY_LEN: usize = 256;

/// Parses a one-query-per-line response: strips list markers and wrapping
/// quotes, drops blank lines, truncates overlong queries, and removes
/// case-folded duplicates while preserving first-seen order.
pub fn parse_response(raw: &str) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for line in raw.lines() {
        let cleaned = strip_wrapping_quotes(strip_list_marker(line)).trim();
        if cleaned.is_empty() {
            continue;
        }
        let mut query = cleaned.to_string();
        if query.len() > MAX_QUERY_LEN {
            log::warn!(
                "truncating over-long query ({} chars): {}…",
                query.len(),
                &query[..40]
            );
            let mut cut = MAX_QUERY_LEN;
            while !query.is_char_boundary(cut) {
                cut -= 1;
            }
            query.truncate(cut);
            query = query.trim_end().to_string();
            if query.is_empty() {
                continue;
            }
        }
        if seen.insert(query.to_lowercase()) {
            out.push(query);
        } else {
            log::warn!("dropping duplicate query: {query}");
        }
    }
    out
}

/// Removes a single leading bullet ("- ", "* ", "• ", "+ ") or numbering
/// ("3. ", "12) ", "7: ") marker. Markers require a trailing separator so a
/// genuine leading hyphen in a query survives.
fn strip_list_marker(line: &str) -> &str {
    let s = line.trim();
    for bullet in ["- ", "* ", "• ", "+ "] {
        if let Some(rest) = s.strip_prefix(bullet) {
            return rest.trim_start();
        }
    }
    let digits = s.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 && digits < s.len() {
        let rest = &s[digits..];
        for sep in [". ", ") ", ": ", ".", ")"] {
            if let Some(r) = rest.strip_prefix(sep) {
                let r = r.trim_start();
                // "3.14 megapixel" style decimals are queries, not numbering
                if !r.is_empty() && !r.starts_with(|c: char| c.is_ascii_digit()) {
                    return r;
                }
            }
        }
    }
    s
}

fn strip_wrapping_quotes(s: &str) -> &str {
    let s = s.trim();
    for q in ['"', '\'', '`'] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return &s[1..s.len() - 1];
        }
    }
    s
}

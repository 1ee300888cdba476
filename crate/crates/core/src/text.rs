//! Tweet tokenization shared by query matching and term statistics.

use std::collections::BTreeSet;

/// Splits tweet text into case-folded terms.
///
/// A term is a maximal run of letters and digits, with apostrophes allowed
/// between word characters. A single `#` or `@` directly before the run is
/// kept as part of the term; such prefixed terms may also contain `_`, as
/// hashtags and handles do. URLs are dropped before scanning.
pub fn terms(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .filter_map(strip_url)
        .flat_map(chunk_terms)
}

/// Set of distinct terms in `text` (presence semantics).
pub fn tokenize(text: &str) -> BTreeSet<String> {
    terms(text).collect()
}

fn strip_url(chunk: &str) -> Option<&str> {
    let lower = chunk.to_ascii_lowercase();
    if lower.starts_with("www.") {
        return None;
    }
    let cut = ["http://", "https://"]
        .iter()
        .filter_map(|scheme| lower.find(scheme))
        .min();
    match cut {
        Some(0) => None,
        Some(pos) => Some(&chunk[..pos]),
        None => Some(chunk),
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn chunk_terms(chunk: &str) -> Vec<String> {
    let chars: Vec<char> = chunk.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (prefix, start) = if (c == '#' || c == '@')
            && chars
                .get(i + 1)
                .is_some_and(|&n| n.is_alphanumeric() || n == '_')
        {
            (Some(c), i + 1)
        } else if c.is_alphanumeric() {
            (None, i)
        } else {
            i += 1;
            continue;
        };

        let mut end = start;
        while end < chars.len() {
            let ch = chars[end];
            let word = ch.is_alphanumeric() || (prefix.is_some() && ch == '_');
            let inner_apostrophe = is_apostrophe(ch)
                && end > start
                && chars.get(end + 1).is_some_and(|n| n.is_alphanumeric());
            if word || inner_apostrophe {
                end += 1;
            } else {
                break;
            }
        }

        let mut term = String::with_capacity(end - start + 1);
        term.extend(prefix);
        for &ch in &chars[start..end] {
            if is_apostrophe(ch) {
                term.push('\'');
            } else {
                term.extend(ch.to_lowercase());
            }
        }
        out.push(term);
        i = end;
    }
    out
}

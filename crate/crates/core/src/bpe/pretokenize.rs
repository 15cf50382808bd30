//! GPT-2 style pre-tokenization with letter runs widened to keep combining
//! marks (Indic matras, viramas, nuktas) attached to the preceding letters.

use std::sync::OnceLock;

use fancy_regex::Regex;
use unicode_normalization::UnicodeNormalization;

// ZWNJ/ZWJ are format characters but act as part of the word in Indic text.
const PATTERN: &str = concat!(
    r"'(?:[sdmt]|ll|ve|re)(?![\p{M}\u{200C}\u{200D}])",
    r"| ?[\p{L}\p{M}\u{200C}\u{200D}]+",
    r"| ?\p{N}+",
    r"| ?[^\s\p{L}\p{M}\p{N}\u{200C}\u{200D}]+",
    r"|\s+(?!\S)",
    r"|\s+",
);

fn regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(PATTERN).expect("pre-tokenizer pattern compiles"))
}

/// Splits `text` into word chunks whose concatenation is exactly `text`.
pub fn pretokenize(text: &str) -> Vec<&str> {
    let mut chunks = Vec::new();
    let mut cursor = 0;
    for m in regex().find_iter(text) {
        // The pattern has no backreferences, so the backtracking limit is never hit
        // on ordinary input; fall back to emitting the rest verbatim if it is.
        let Ok(m) = m else { break };
        debug_assert_eq!(m.start(), cursor);
        chunks.push(m.as_str());
        cursor = m.end();
    }
    if cursor < text.len() {
        chunks.push(&text[cursor..]);
    }
    chunks
}

/// NFC normalization applied when text enters the toolkit (corpus lines,
/// command-line input). Encoding itself never normalizes.
pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

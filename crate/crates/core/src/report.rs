//! Token-count statistics and canonical JSON output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bpe::{normalize, Tokenizer};

/// Serializes with sorted object keys, two-space indentation and every
/// non-integer number printed with six decimals.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match value {
        Value::Null | Value::Bool(_) | Value::String(_) => {
            out.push_str(&serde_json::to_string(value).expect("scalar serializes"))
        }
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => write!(out, "{i}").unwrap(),
            (_, Some(u), _) => write!(out, "{u}").unwrap(),
            (_, _, Some(f)) => write!(out, "{}", fixed6(f)).unwrap(),
            _ => out.push_str("null"),
        },
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, item, depth + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, key) in keys.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                write_value(out, &map[*key], depth + 1);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

fn fixed6(f: f64) -> String {
    let s = format!("{f:.6}");
    // avoid "-0.000000"
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".to_string()
    } else {
        s
    }
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    Ok(canonical_json(&serde_json::to_value(value)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineStats {
    pub line_no: usize,
    pub base_tokens: usize,
    pub ext_tokens: usize,
    pub words: usize,
    pub chars: usize,
}

impl LineStats {
    /// ext / base; 1.0 for lines that produce no tokens.
    pub fn ratio(&self) -> f64 {
        if self.base_tokens == 0 {
            1.0
        } else {
            self.ext_tokens as f64 / self.base_tokens as f64
        }
    }

    /// Fraction of tokens saved: `1 - ratio`.
    pub fn reduction(&self) -> f64 {
        1.0 - self.ratio()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fertility {
    pub tokens_per_word: f64,
    pub tokens_per_char: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenStatsSummary {
    pub lines: usize,
    pub words: usize,
    pub chars: usize,
    pub base_tokens: usize,
    pub ext_tokens: usize,
    pub mean_base_tokens_per_line: f64,
    pub mean_ext_tokens_per_line: f64,
    /// Mean over lines of ext/base.
    pub mean_ratio: f64,
    /// `1 - mean_ratio`.
    pub mean_reduction: f64,
    /// Total ext tokens over total base tokens.
    pub aggregate_ratio: f64,
    /// Lines where the extension produced more tokens than the base.
    pub monotonicity_violations: usize,
    pub base_fertility: Fertility,
    pub ext_fertility: Fertility,
}

/// Published single-sentence base/extended counts, carried for comparison only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub language: String,
    pub base_tokens: usize,
    pub ext_tokens: usize,
}

pub fn reference_points() -> Vec<ReferencePoint> {
    [("en", 4, 4), ("hi", 27, 19), ("ml", 79, 31)]
        .into_iter()
        .map(|(language, base_tokens, ext_tokens)| ReferencePoint {
            language: language.into(),
            base_tokens,
            ext_tokens,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenStatsReport {
    pub summary: TokenStatsSummary,
    pub lines: Vec<LineStats>,
    pub reference_points: Vec<ReferencePoint>,
}

impl TokenStatsReport {
    pub fn to_json(&self) -> String {
        to_canonical_json(self).expect("report serializes")
    }

    /// `line_no,base_tokens,ext_tokens,reduction` with reduction = 1 - ext/base.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("line_no,base_tokens,ext_tokens,reduction\n");
        for l in &self.lines {
            writeln!(
                out,
                "{},{},{},{}",
                l.line_no,
                l.base_tokens,
                l.ext_tokens,
                fixed6(l.reduction())
            )
            .unwrap();
        }
        out
    }
}

fn per(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

/// Counts every line (after NFC) under both tokenizers.
pub fn reduction_report<I, S>(lines: I, base: &Tokenizer, extended: &Tokenizer) -> TokenStatsReport
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let stats: Vec<LineStats> = lines
        .into_iter()
        .enumerate()
        .map(|(i, line)| {
            let text = normalize(line.as_ref());
            LineStats {
                line_no: i + 1,
                base_tokens: base.token_count(&text),
                ext_tokens: extended.token_count(&text),
                words: text.split_whitespace().count(),
                chars: text.chars().count(),
            }
        })
        .collect();

    let n = stats.len();
    let sum = |f: fn(&LineStats) -> usize| stats.iter().map(f).sum::<usize>();
    let (words, chars) = (sum(|l| l.words), sum(|l| l.chars));
    let (base_tokens, ext_tokens) = (sum(|l| l.base_tokens), sum(|l| l.ext_tokens));
    let mean_ratio = if n == 0 {
        1.0
    } else {
        stats.iter().map(LineStats::ratio).sum::<f64>() / n as f64
    };
    let summary = TokenStatsSummary {
        lines: n,
        words,
        chars,
        base_tokens,
        ext_tokens,
        mean_base_tokens_per_line: per(base_tokens, n),
        mean_ext_tokens_per_line: per(ext_tokens, n),
        mean_ratio,
        mean_reduction: 1.0 - mean_ratio,
        aggregate_ratio: if base_tokens == 0 { 1.0 } else { per(ext_tokens, base_tokens) },
        monotonicity_violations: stats.iter().filter(|l| l.ext_tokens > l.base_tokens).count(),
        base_fertility: Fertility {
            tokens_per_word: per(base_tokens, words),
            tokens_per_char: per(base_tokens, chars),
        },
        ext_fertility: Fertility {
            tokens_per_word: per(ext_tokens, words),
            tokens_per_char: per(ext_tokens, chars),
        },
    };
    TokenStatsReport {
        summary,
        lines: stats,
        reference_points: reference_points(),
    }
}

//! `vocab.json` / `added_tokens.json` / `merges.txt` reading and writing,
//! plus conversion from tiktoken rank files.
//!
//! A tokenizer directory holds:
//! - `vocab.json`: object mapping ordinary token-string to id, written in id order;
//! - `added_tokens.json`: array of `{"name", "id", "special": true}`;
//! - `merges.txt`: `#version: 0.2` header, then one `left right` rule per line.
//!
//! The reader also accepts an `"added_tokens"` array embedded in `vocab.json`.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bpe::bytes::ByteSymbolMap;
use crate::bpe::merges::MergeTable;
use crate::bpe::tokenizer::Tokenizer;
use crate::bpe::vocab::Vocabulary;
use crate::error::{Error, Result};
use crate::TokenId;

pub const VOCAB_FILE: &str = "vocab.json";
pub const ADDED_TOKENS_FILE: &str = "added_tokens.json";
pub const MERGES_FILE: &str = "merges.txt";
pub const MERGES_HEADER: &str = "#version: 0.2";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedToken {
    pub name: String,
    pub id: TokenId,
    #[serde(default = "default_true")]
    pub special: bool,
}

fn default_true() -> bool {
    true
}

pub fn parse_vocab(vocab_json: &str, added_json: Option<&str>) -> Result<Vocabulary> {
    let value: Value = serde_json::from_str(vocab_json)?;
    let Value::Object(map) = value else {
        return Err(Error::MalformedVocab("vocab.json must be a JSON object".into()));
    };
    let mut added: Vec<AddedToken> = match added_json {
        Some(s) => serde_json::from_str(s)?,
        None => Vec::new(),
    };
    let mut ordinary = Vec::with_capacity(map.len());
    for (key, val) in map {
        match val {
            Value::Number(n) => {
                let id = n
                    .as_u64()
                    .and_then(|v| TokenId::try_from(v).ok())
                    .ok_or_else(|| Error::MalformedVocab(format!("bad id for `{key}`")))?;
                ordinary.push((key, id));
            }
            Value::Array(_) if key == "added_tokens" => {
                added.extend(serde_json::from_value::<Vec<AddedToken>>(val)?);
            }
            _ => return Err(Error::MalformedVocab(format!("bad value for `{key}`"))),
        }
    }
    let special_names: HashSet<&str> = added
        .iter()
        .filter(|a| a.special)
        .map(|a| a.name.as_str())
        .collect();
    let mut entries: Vec<(String, TokenId, bool)> = Vec::new();
    let mut seen_ids = HashSet::new();
    for (text, id) in ordinary {
        // HF-style vocab.json repeats specials such as <|endoftext|>
        if special_names.contains(text.as_str()) {
            continue;
        }
        seen_ids.insert(id);
        entries.push((text, id, false));
    }
    for a in &added {
        if a.special || !seen_ids.contains(&a.id) {
            entries.push((a.name.clone(), a.id, a.special));
        }
    }
    Vocabulary::from_entries(entries)
}

pub fn parse_merges(text: &str) -> Result<MergeTable> {
    let mut table = MergeTable::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.is_empty() || (idx == 0 && line.starts_with("#version")) {
            continue;
        }
        let (left, right) = line.split_once(' ').ok_or_else(|| Error::MalformedMerges {
            line: lineno,
            reason: "expected `left right`".into(),
        })?;
        if left.is_empty() || right.is_empty() || right.contains(' ') {
            return Err(Error::MalformedMerges {
                line: lineno,
                reason: "expected exactly two non-empty tokens".into(),
            });
        }
        if !table.push(left.to_string(), right.to_string()) {
            return Err(Error::MalformedMerges {
                line: lineno,
                reason: format!("duplicate rule `{line}`"),
            });
        }
    }
    Ok(table)
}

pub fn vocab_to_json(vocab: &Vocabulary) -> String {
    let mut out = String::with_capacity(vocab.len() * 16);
    out.push_str("{\n");
    let mut first = true;
    for (id, token) in vocab.iter().filter(|(_, t)| !t.special) {
        if !first {
            out.push_str(",\n");
        }
        first = false;
        out.push_str("  ");
        out.push_str(&serde_json::to_string(&token.text).expect("strings serialize"));
        out.push_str(": ");
        out.push_str(&id.to_string());
    }
    out.push_str("\n}\n");
    out
}

pub fn added_tokens(vocab: &Vocabulary) -> Vec<AddedToken> {
    vocab
        .iter()
        .filter(|(_, t)| t.special)
        .map(|(id, t)| AddedToken {
            name: t.text.clone(),
            id,
            special: true,
        })
        .collect()
}

pub fn added_tokens_to_json(vocab: &Vocabulary) -> String {
    let mut out = String::from("[\n");
    let tokens = added_tokens(vocab);
    for (i, a) in tokens.iter().enumerate() {
        out.push_str("  ");
        out.push_str(&serde_json::to_string(a).expect("added token serializes"));
        if i + 1 < tokens.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

pub fn merges_to_text(merges: &MergeTable) -> String {
    let mut out = String::with_capacity(merges.len() * 12);
    out.push_str(MERGES_HEADER);
    out.push('\n');
    for (l, r) in merges.iter() {
        out.push_str(l);
        out.push(' ');
        out.push_str(r);
        out.push('\n');
    }
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

impl Tokenizer {
    /// Loads `vocab.json`, `merges.txt` and (if present) `added_tokens.json` from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let vocab_json = read(&dir.join(VOCAB_FILE))?;
        let added_path = dir.join(ADDED_TOKENS_FILE);
        let added = if added_path.exists() {
            Some(read(&added_path)?)
        } else {
            None
        };
        let vocab = parse_vocab(&vocab_json, added.as_deref())?;
        let merges = parse_merges(&read(&dir.join(MERGES_FILE))?)?;
        Tokenizer::new(vocab, merges)
    }

    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write(&dir.join(VOCAB_FILE), &vocab_to_json(self.vocab()))?;
        write(&dir.join(ADDED_TOKENS_FILE), &added_tokens_to_json(self.vocab()))?;
        write(&dir.join(MERGES_FILE), &merges_to_text(self.merges()))
    }

    /// The bundled GPT-2 byte-level BPE (50,256 ordinary tokens, 50,000 merges)
    /// with Whisper's special tokens appended.
    pub fn gpt2_base() -> &'static Tokenizer {
        static BASE: OnceLock<Tokenizer> = OnceLock::new();
        BASE.get_or_init(|| {
            let vocab = parse_vocab(
                include_str!("../../assets/gpt2/vocab.json"),
                Some(include_str!("../../assets/gpt2/added_tokens.json")),
            )
            .expect("bundled vocab parses");
            let merges =
                parse_merges(include_str!("../../assets/gpt2/merges.txt")).expect("bundled merges parse");
            Tokenizer::new(vocab, merges).expect("bundled tokenizer is consistent")
        })
    }
}

/// Rebuilds a GPT-2 style vocabulary and merge list from a tiktoken rank file
/// (`base64-token rank` per line). A token's merge is the last step of
/// byte-pair merging its own bytes using only lower-ranked tokens.
pub fn from_tiktoken(ranks_file: &str) -> Result<(Vocabulary, MergeTable)> {
    let b64 = base64::engine::general_purpose::STANDARD;
    let mut by_rank: Vec<(Vec<u8>, u32)> = Vec::new();
    for (idx, line) in ranks_file.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = || Error::MalformedVocab(format!("tiktoken line {}", idx + 1));
        let (tok, rank) = line.split_once(' ').ok_or_else(bad)?;
        let bytes = b64.decode(tok).map_err(|_| bad())?;
        let rank: u32 = rank.trim().parse().map_err(|_| bad())?;
        by_rank.push((bytes, rank));
    }
    by_rank.sort_by_key(|(_, r)| *r);
    let ranks: HashMap<Vec<u8>, u32> = by_rank.iter().cloned().collect();

    let map = ByteSymbolMap::global();
    let vocab = Vocabulary::from_entries(
        by_rank
            .iter()
            .map(|(bytes, rank)| (map.encode(bytes), *rank, false)),
    )?;

    let mut merges = MergeTable::new();
    for (bytes, rank) in &by_rank {
        if bytes.len() < 2 {
            continue;
        }
        let parts = split_by_rank(bytes, &ranks, *rank);
        if parts.len() != 2 {
            return Err(Error::InvalidMerge(format!(
                "token of rank {rank} does not reduce to a pair"
            )));
        }
        merges.push(map.encode(parts[0]), map.encode(parts[1]));
    }
    Ok((vocab, merges))
}

fn split_by_rank<'a>(bytes: &'a [u8], ranks: &HashMap<Vec<u8>, u32>, limit: u32) -> Vec<&'a [u8]> {
    let mut bounds: Vec<usize> = (0..=bytes.len()).collect();
    loop {
        let mut best: Option<(u32, usize)> = None;
        for i in 0..bounds.len().saturating_sub(2) {
            let piece = &bytes[bounds[i]..bounds[i + 2]];
            if let Some(&r) = ranks.get(piece) {
                if r < limit && best.is_none_or(|(b, _)| r < b) {
                    best = Some((r, i));
                }
            }
        }
        match best {
            Some((_, i)) => {
                bounds.remove(i + 1);
            }
            None => break,
        }
    }
    bounds.windows(2).map(|w| &bytes[w[0]..w[1]]).collect()
}

//! Continued BPE training: learn new merges on top of a frozen base tokenizer.
//!
//! Every corpus chunk is first encoded with the base tokenizer; standard BPE
//! training then runs over those id sequences, so each learned token is a
//! merge of two tokens that already exist.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::BufRead;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bpe::{normalize, pretokenize, Tokenizer};
use crate::error::{Error, Result};
use crate::extension::fingerprint;
use crate::TokenId;

pub const DEFAULT_MIN_PAIR_FREQ: u64 = 2;

/// Chunk frequencies of an NFC-normalized, pre-tokenized corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub word_freqs: BTreeMap<String, u64>,
    pub total_chunks: u64,
}

impl CorpusCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_line(&mut self, line: &str) {
        let line = normalize(line);
        for chunk in pretokenize(&line) {
            *self.word_freqs.entry(chunk.to_string()).or_insert(0) += 1;
            self.total_chunks += 1;
        }
    }

    pub fn merge(&mut self, other: CorpusCounts) {
        for (word, n) in other.word_freqs {
            *self.word_freqs.entry(word).or_insert(0) += n;
        }
        self.total_chunks += other.total_chunks;
    }

    pub fn distinct(&self) -> usize {
        self.word_freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_freqs.is_empty()
    }
}

pub fn count_corpus<I, S>(lines: I) -> CorpusCounts
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts = CorpusCounts::new();
    for line in lines {
        counts.add_line(line.as_ref());
    }
    counts
}

/// Counts `lines` split into `shards` pieces processed in parallel. The
/// result does not depend on the shard count.
pub fn count_corpus_sharded<S>(lines: &[S], shards: usize) -> CorpusCounts
where
    S: AsRef<str> + Sync,
{
    let shard_len = lines.len().div_ceil(shards.max(1)).max(1);
    lines
        .par_chunks(shard_len)
        .map(count_corpus)
        .reduce(CorpusCounts::new, |mut a, b| {
            a.merge(b);
            a
        })
}

/// A corpus file read as lines, plus the SHA-256 of its bytes.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub lines: Vec<String>,
    pub fingerprint: String,
}

impl Corpus {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let lines = read_lines(bytes)?;
        Ok(Self {
            lines,
            fingerprint: sha256_hex(bytes),
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Splits on `\n` (dropping a trailing `\r`), validating each line.
pub fn read_lines(bytes: &[u8]) -> Result<Vec<String>> {
    if bytes.is_empty() {
        return Ok(Vec::new());
    }
    let body = bytes.strip_suffix(b"\n").unwrap_or(bytes);
    body.split(|&b| b == b'\n')
        .enumerate()
        .map(|(idx, raw)| {
            let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
            std::str::from_utf8(raw)
                .map(str::to_string)
                .map_err(|_| Error::InvalidUtf8 {
                    line: Some(idx + 1),
                })
        })
        .collect()
}

/// Streams lines from a reader, reporting the 1-based line of any invalid UTF-8.
pub fn count_reader(reader: impl BufRead) -> Result<CorpusCounts> {
    let mut counts = CorpusCounts::new();
    for (idx, line) in reader.split(b'\n').enumerate() {
        let raw = line.map_err(|e| Error::io("<stream>", e))?;
        let raw = raw.strip_suffix(b"\r").unwrap_or(&raw);
        let line = std::str::from_utf8(raw).map_err(|_| Error::InvalidUtf8 {
            line: Some(idx + 1),
        })?;
        counts.add_line(line);
    }
    Ok(counts)
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// New merges learned for one language, serialized as `extension.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnedExtension {
    pub language: String,
    pub budget_y: usize,
    pub min_pair_freq: u64,
    pub merges: Vec<(String, String)>,
    pub tokens: Vec<String>,
    pub base_fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_fingerprint: Option<String>,
}

impl LearnedExtension {
    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainerConfig {
    pub budget_y: usize,
    pub min_pair_freq: u64,
}

impl TrainerConfig {
    pub fn new(budget_y: usize) -> Self {
        Self {
            budget_y,
            min_pair_freq: DEFAULT_MIN_PAIR_FREQ,
        }
    }
}

struct Word {
    ids: Vec<TokenId>,
    freq: u64,
}

impl Word {
    fn pairs(&self) -> impl Iterator<Item = (TokenId, TokenId)> + '_ {
        self.ids.windows(2).map(|w| (w[0], w[1]))
    }

    fn contains(&self, pair: (TokenId, TokenId)) -> bool {
        self.pairs().any(|p| p == pair)
    }

    /// Left-to-right, non-overlapping replacement of `pair` by `merged`.
    fn apply(&mut self, pair: (TokenId, TokenId), merged: TokenId) {
        let mut out = Vec::with_capacity(self.ids.len());
        let mut i = 0;
        while i < self.ids.len() {
            if i + 1 < self.ids.len() && (self.ids[i], self.ids[i + 1]) == pair {
                out.push(merged);
                i += 2;
            } else {
                out.push(self.ids[i]);
                i += 1;
            }
        }
        self.ids = out;
    }
}

struct Symbols<'a> {
    base: &'a Tokenizer,
    learned: Vec<String>,
    learned_set: HashSet<String>,
}

impl Symbols<'_> {
    fn text(&self, id: TokenId) -> &str {
        let base_len = self.base.vocab().len();
        match (id as usize).checked_sub(base_len) {
            Some(i) => &self.learned[i],
            None => &self.base.vocab().get(id).expect("base id").text,
        }
    }

    fn exists(&self, text: &str) -> bool {
        self.base.vocab().contains(text) || self.learned_set.contains(text)
    }
}

/// Learns up to `config.budget_y` merges. At each step the most frequent
/// adjacent pair wins; equal counts go to the lexicographically smallest
/// (left, right) token-strings. Pairs whose concatenation already exists as a
/// token are never selected, and pairs never span chunk boundaries.
pub fn learn_merges(
    counts: &CorpusCounts,
    base: &Tokenizer,
    language: &str,
    config: TrainerConfig,
) -> LearnedExtension {
    let mut ext = LearnedExtension {
        language: language.to_string(),
        budget_y: config.budget_y,
        min_pair_freq: config.min_pair_freq,
        merges: Vec::new(),
        tokens: Vec::new(),
        base_fingerprint: fingerprint(base.vocab(), base.merges()),
        corpus_fingerprint: None,
    };
    if config.budget_y == 0 {
        return ext;
    }

    let mut words: Vec<Word> = counts
        .word_freqs
        .iter()
        .map(|(chunk, &freq)| Word {
            ids: base.encode(chunk),
            freq,
        })
        .filter(|w| w.ids.len() > 1)
        .collect();

    let mut pair_counts: HashMap<(TokenId, TokenId), u64> = HashMap::new();
    let mut where_: HashMap<(TokenId, TokenId), HashSet<usize>> = HashMap::new();
    for (wi, word) in words.iter().enumerate() {
        for p in word.pairs() {
            *pair_counts.entry(p).or_insert(0) += word.freq;
            where_.entry(p).or_default().insert(wi);
        }
    }

    let mut symbols = Symbols {
        base,
        learned: Vec::new(),
        learned_set: HashSet::new(),
    };
    let mut banned: HashSet<(TokenId, TokenId)> = HashSet::new();
    let next_id = base.vocab().len() as TokenId;

    while ext.merges.len() < config.budget_y {
        let mut best: Option<((TokenId, TokenId), u64)> = None;
        for (&pair, &count) in &pair_counts {
            if count < config.min_pair_freq || banned.contains(&pair) {
                continue;
            }
            let better = match best {
                None => true,
                Some((bp, bc)) => {
                    count > bc
                        || (count == bc
                            && (symbols.text(pair.0), symbols.text(pair.1))
                                < (symbols.text(bp.0), symbols.text(bp.1)))
                }
            };
            if !better {
                continue;
            }
            let merged = format!("{}{}", symbols.text(pair.0), symbols.text(pair.1));
            if symbols.exists(&merged) {
                banned.insert(pair);
                continue;
            }
            best = Some((pair, count));
        }
        let Some((pair, _)) = best else { break };

        let left = symbols.text(pair.0).to_string();
        let right = symbols.text(pair.1).to_string();
        let merged_text = format!("{left}{right}");
        let merged_id = next_id + symbols.learned.len() as TokenId;
        symbols.learned.push(merged_text.clone());
        symbols.learned_set.insert(merged_text.clone());
        ext.merges.push((left, right));
        ext.tokens.push(merged_text);

        let mut touched: Vec<usize> = where_.remove(&pair).unwrap_or_default().into_iter().collect();
        touched.sort_unstable();
        for wi in touched {
            let word = &mut words[wi];
            if !word.contains(pair) {
                continue;
            }
            for p in word.pairs() {
                if let Some(c) = pair_counts.get_mut(&p) {
                    *c -= word.freq;
                    if *c == 0 {
                        pair_counts.remove(&p);
                    }
                }
            }
            word.apply(pair, merged_id);
            for p in word.pairs() {
                *pair_counts.entry(p).or_insert(0) += word.freq;
                where_.entry(p).or_default().insert(wi);
            }
        }
        pair_counts.remove(&pair);
    }
    ext
}

/// Trains each language independently against the same base, in parallel.
/// Results are ordered by language code.
pub fn learn_all(
    corpora: &BTreeMap<String, Corpus>,
    base: &Tokenizer,
    budgets: &BTreeMap<String, TrainerConfig>,
) -> Result<Vec<LearnedExtension>> {
    corpora
        .par_iter()
        .map(|(lang, corpus)| {
            let config = budgets.get(lang).copied().ok_or_else(|| Error::Language {
                language: lang.clone(),
                source: Box::new(Error::InvalidConfig("no budget given".into())),
            })?;
            let counts = count_corpus(&corpus.lines);
            let mut ext = learn_merges(&counts, base, lang, config);
            ext.corpus_fingerprint = Some(corpus.fingerprint.clone());
            Ok(ext)
        })
        .collect()
}

//! Reference trainer: recounts every pair over every word on each iteration.

use std::collections::{BTreeMap, HashSet};

use graftok::bpe::{normalize, pretokenize};
use graftok::Tokenizer;

pub fn chunk_counts<S: AsRef<str>>(lines: &[S]) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for line in lines {
        let line = normalize(line.as_ref());
        for chunk in pretokenize(&line) {
            *counts.entry(chunk.to_string()).or_insert(0) += 1;
        }
    }
    counts
}

pub fn learn(
    counts: &BTreeMap<String, u64>,
    base: &Tokenizer,
    y: usize,
    min_freq: u64,
) -> Vec<(String, String)> {
    let vocab = base.vocab();
    let mut words: Vec<(Vec<String>, u64)> = counts
        .iter()
        .map(|(chunk, &n)| {
            let toks = base
                .encode(chunk)
                .iter()
                .map(|&id| vocab.get(id).unwrap().text.clone())
                .collect();
            (toks, n)
        })
        .collect();
    let mut learned: HashSet<String> = HashSet::new();
    let mut merges = Vec::new();

    while merges.len() < y {
        let mut pairs: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (toks, n) in &words {
            for w in toks.windows(2) {
                *pairs.entry((w[0].clone(), w[1].clone())).or_insert(0) += n;
            }
        }
        // BTreeMap iterates in (left, right) order, so the first maximum wins ties.
        let mut best: Option<(&(String, String), u64)> = None;
        for (pair, &n) in &pairs {
            let joined = format!("{}{}", pair.0, pair.1);
            if n < min_freq || vocab.contains(&joined) || learned.contains(&joined) {
                continue;
            }
            if best.is_none_or(|(_, bn)| n > bn) {
                best = Some((pair, n));
            }
        }
        let Some((pair, _)) = best else { break };
        let pair = pair.clone();
        let joined = format!("{}{}", pair.0, pair.1);
        for (toks, _) in &mut words {
            let mut out = Vec::with_capacity(toks.len());
            let mut i = 0;
            while i < toks.len() {
                if i + 1 < toks.len() && toks[i] == pair.0 && toks[i + 1] == pair.1 {
                    out.push(joined.clone());
                    i += 2;
                } else {
                    out.push(toks[i].clone());
                    i += 1;
                }
            }
            *toks = out;
        }
        learned.insert(joined);
        merges.push(pair);
    }
    merges
}

//! Seeded sentence generator over per-language word-frequency lists.

use std::collections::HashSet;

use fancy_regex::Regex;
use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub const INDIC: [&str; 8] = ["hi", "gu", "mr", "bn", "ta", "te", "kn", "ml"];

fn table(lang: &str) -> &'static str {
    match lang {
        "hi" => include_str!("../../data/wordfreq/hi.tsv"),
        "bn" => include_str!("../../data/wordfreq/bn.tsv"),
        "ta" => include_str!("../../data/wordfreq/ta.tsv"),
        "en" => include_str!("../../data/wordfreq/en.tsv"),
        _ => panic!("no word list for {lang}"),
    }
}

fn parse(text: &str) -> Vec<(String, f64)> {
    text.lines()
        .filter_map(|l| {
            let (w, f) = l.split_once('\t')?;
            Some((w.to_string(), f.parse().ok()?))
        })
        .collect()
}

/// Moves Devanagari code points into another Brahmic block at the same
/// offset, dropping words that land on unassigned code points.
fn shift_from_devanagari(words: Vec<(String, f64)>, block: u32) -> Vec<(String, f64)> {
    let letters = Regex::new(r"^[\p{L}\p{M}]+$").unwrap();
    words
        .into_iter()
        .filter_map(|(w, f)| {
            let shifted: Option<String> = w
                .chars()
                .map(|c| match c as u32 {
                    cp @ 0x0900..=0x097F => char::from_u32(cp - 0x0900 + block),
                    _ => Some(c),
                })
                .collect();
            let s = shifted?;
            letters.is_match(&s).unwrap().then_some((s, f))
        })
        .collect()
}

/// `(word, weight)` pairs. Languages without a bundled list are derived from
/// the Hindi list: script-shifted for gu/te/kn/ml, rank-reversed for mr.
pub fn words(lang: &str) -> Vec<(String, f64)> {
    match lang {
        "hi" | "bn" | "ta" | "en" => parse(table(lang)),
        "gu" => shift_from_devanagari(parse(table("hi")), 0x0A80),
        "te" => shift_from_devanagari(parse(table("hi")), 0x0C00),
        "kn" => shift_from_devanagari(parse(table("hi")), 0x0C80),
        "ml" => shift_from_devanagari(parse(table("hi")), 0x0D00),
        "mr" => {
            let mut w = parse(table("hi"));
            let freqs: Vec<f64> = w.iter().map(|x| x.1).collect();
            for (entry, f) in w.iter_mut().zip(freqs.into_iter().rev()) {
                entry.1 = f;
            }
            w
        }
        _ => panic!("unsupported language {lang}"),
    }
}

fn terminator(lang: &str) -> &'static str {
    match lang {
        "hi" | "mr" | "bn" => " ।",
        _ => ".",
    }
}

/// `n` distinct sentences of 4 to 14 words sampled by word frequency.
/// Lines listed in `exclude` are never produced.
pub fn sentences(lang: &str, n: usize, seed: u64, exclude: &HashSet<String>) -> Vec<String> {
    let vocab = words(lang);
    let dist = WeightedIndex::new(vocab.iter().map(|w| w.1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.random_range(4..=14);
        let words: Vec<&str> = (0..len).map(|_| vocab[dist.sample(&mut rng)].0.as_str()).collect();
        let line = format!("{}{}", words.join(" "), terminator(lang));
        if !exclude.contains(&line) && seen.insert(line.clone()) {
            out.push(line);
        }
    }
    out
}

/// Disjoint training and held-out sets.
pub fn split(lang: &str, n_train: usize, n_heldout: usize, seed: u64) -> (Vec<String>, Vec<String>) {
    let train = sentences(lang, n_train, seed, &HashSet::new());
    let exclude: HashSet<String> = train.iter().cloned().collect();
    let held = sentences(lang, n_heldout, seed ^ 0x9e37_79b9_7f4a_7c15, &exclude);
    (train, held)
}

/// Random strings mixing ASCII, Indic scripts, joiners and emoji.
pub fn mixed_string(rng: &mut impl Rng) -> String {
    const RANGES: [(u32, u32); 9] = [
        (0x20, 0x7E),
        (0x0900, 0x097F),
        (0x0B80, 0x0BFA),
        (0x0D00, 0x0D7F),
        (0x0980, 0x09FE),
        (0x1F300, 0x1F64F),
        (0x200C, 0x200D),
        (0x00A0, 0x00FF),
        (0x0A, 0x0A),
    ];
    let len = rng.random_range(0..40);
    let mut s = String::new();
    let mut range = RANGES[rng.random_range(0..RANGES.len())];
    for _ in 0..len {
        if rng.random_bool(0.25) {
            range = RANGES[rng.random_range(0..RANGES.len())];
        }
        let cp = rng.random_range(range.0..=range.1);
        if let Some(c) = char::from_u32(cp) {
            s.push(c);
        }
    }
    s
}

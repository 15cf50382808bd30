#![allow(dead_code)]

pub mod oracle;
pub mod synth;

use graftok::extension::extend_vocabulary;
use graftok::prompt::LanguageFamilyMap;
use graftok::trainer::{count_corpus, learn_merges, LearnedExtension, TrainerConfig};
use graftok::Tokenizer;

pub fn base() -> &'static Tokenizer {
    Tokenizer::gpt2_base()
}

pub fn train(lang: &str, lines: &[String], y: usize) -> LearnedExtension {
    learn_merges(&count_corpus(lines), base(), lang, TrainerConfig::new(y))
}

/// Base plus the given extensions and both family prompt tokens.
pub fn extend(exts: &[LearnedExtension]) -> Tokenizer {
    let prompts = LanguageFamilyMap::default().prompt_tokens();
    extend_vocabulary(base(), exts, &prompts).unwrap().0
}

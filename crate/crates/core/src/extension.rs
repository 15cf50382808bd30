//! Grafting learned extensions onto a frozen base tokenizer.
//!
//! New merges go after every base merge, so base behaviour is untouched unless
//! a text contains a token that appears as one side of a new merge. New
//! ordinary tokens take ids from the base size upward; family prompt specials
//! take the last ids.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bpe::{MergeTable, Tokenizer, Vocabulary};
use crate::error::{Error, Result};
use crate::trainer::LearnedExtension;
use crate::TokenId;

/// SHA-256 over the id <-> token mapping (in id order, with the special flag)
/// followed by the merge rules in rank order. Independent of on-disk layout.
pub fn fingerprint(vocab: &Vocabulary, merges: &MergeTable) -> String {
    let mut h = Sha256::new();
    h.update(b"graftok-fingerprint-v1\n");
    for (id, token) in vocab.iter() {
        h.update(id.to_le_bytes());
        h.update([u8::from(token.special)]);
        h.update((token.text.len() as u64).to_le_bytes());
        h.update(token.text.as_bytes());
    }
    h.update(b"merges\n");
    for (l, r) in merges.iter() {
        h.update((l.len() as u64).to_le_bytes());
        h.update(l.as_bytes());
        h.update((r.len() as u64).to_le_bytes());
        h.update(r.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub language: String,
    /// Position of the merge in that language's learned list.
    pub learned_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub token: String,
    pub id: TokenId,
    /// Language that first contributed the token.
    pub language: String,
    /// Rank of the producing merge in the extended merge table.
    pub merge_rank: usize,
    pub learned_rank: usize,
    /// Other languages that learned the same token string.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub also_claimed_by: Vec<Claim>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyPromptToken {
    pub name: String,
    pub id: TokenId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageSummary {
    pub language: String,
    pub budget_y: usize,
    /// Merges the trainer produced (at most `budget_y`).
    pub learned: usize,
    /// Tokens this language contributed first after cross-language dedup.
    pub materialized: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_fingerprint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionManifest {
    pub base_fingerprint: String,
    pub extended_fingerprint: String,
    pub base_size: usize,
    pub base_merges: usize,
    /// Shared budget when every language used the same one.
    pub budget_y: Option<usize>,
    pub entries: Vec<ManifestEntry>,
    pub family_prompt_tokens: Vec<FamilyPromptToken>,
    pub languages: Vec<LanguageSummary>,
    pub corpus_fingerprints: BTreeMap<String, String>,
}

impl ExtensionManifest {
    /// Number of ids added on top of the base (ordinary and family tokens).
    pub fn new_ids(&self) -> usize {
        self.entries.len() + self.family_prompt_tokens.len()
    }
}

/// Appends the extensions' merges (ordered by language code, then learned
/// rank) and the family prompt specials to `base`.
pub fn extend_vocabulary(
    base: &Tokenizer,
    extensions: &[LearnedExtension],
    family_prompts: &[String],
) -> Result<(Tokenizer, ExtensionManifest)> {
    let base_fp = fingerprint(base.vocab(), base.merges());
    for ext in extensions {
        if ext.base_fingerprint != base_fp {
            return Err(Error::FingerprintMismatch {
                language: ext.language.clone(),
                expected: base_fp,
                found: ext.base_fingerprint.clone(),
            });
        }
    }
    let mut ordered: Vec<&LearnedExtension> = extensions.iter().collect();
    ordered.sort_by(|a, b| a.language.cmp(&b.language));

    let mut vocab = base.vocab().clone();
    let mut merges = base.merges().clone();
    let base_size = vocab.len();
    let mut entries: Vec<ManifestEntry> = Vec::new();
    let mut entry_of: HashMap<String, usize> = HashMap::new();
    let mut languages = Vec::new();
    let mut corpus_fingerprints = BTreeMap::new();

    for ext in &ordered {
        if ext.tokens.len() != ext.merges.len() {
            return Err(Error::InvalidMerge(format!(
                "extension `{}` has {} merges but {} tokens",
                ext.language,
                ext.merges.len(),
                ext.tokens.len()
            )));
        }
        let mut materialized = 0;
        for (learned_rank, ((left, right), token)) in ext.merges.iter().zip(&ext.tokens).enumerate() {
            if format!("{left}{right}") != *token {
                return Err(Error::InvalidMerge(format!(
                    "`{}`: token `{token}` is not `{left}` + `{right}`",
                    ext.language
                )));
            }
            merges.push(left.clone(), right.clone());
            if let Some(&idx) = entry_of.get(token) {
                let claim = Claim {
                    language: ext.language.clone(),
                    learned_rank,
                };
                let entry = &mut entries[idx];
                if entry.language != claim.language && !entry.also_claimed_by.contains(&claim) {
                    entry.also_claimed_by.push(claim);
                }
                continue;
            }
            if vocab.contains(token) {
                return Err(Error::InvalidMerge(format!(
                    "`{}`: token `{token}` already exists in the base vocabulary",
                    ext.language
                )));
            }
            let id = vocab.push_ordinary(token.clone())?;
            entry_of.insert(token.clone(), entries.len());
            entries.push(ManifestEntry {
                token: token.clone(),
                id,
                language: ext.language.clone(),
                merge_rank: merges.len() - 1,
                learned_rank,
                also_claimed_by: Vec::new(),
            });
            materialized += 1;
        }
        languages.push(LanguageSummary {
            language: ext.language.clone(),
            budget_y: ext.budget_y,
            learned: ext.merges.len(),
            materialized,
            corpus_fingerprint: ext.corpus_fingerprint.clone(),
        });
        if let Some(fp) = &ext.corpus_fingerprint {
            corpus_fingerprints.insert(ext.language.clone(), fp.clone());
        }
    }

    let mut family_prompt_tokens = Vec::new();
    for name in family_prompts {
        let id = vocab.push_special(name.clone())?;
        family_prompt_tokens.push(FamilyPromptToken {
            name: name.clone(),
            id,
        });
    }

    let budget_y = match ordered.first() {
        Some(first) if ordered.iter().all(|e| e.budget_y == first.budget_y) => Some(first.budget_y),
        _ => None,
    };
    let tokenizer = Tokenizer::new(vocab, merges)?;
    let manifest = ExtensionManifest {
        base_fingerprint: base_fp,
        extended_fingerprint: fingerprint(tokenizer.vocab(), tokenizer.merges()),
        base_size,
        base_merges: base.merges().len(),
        budget_y,
        entries,
        family_prompt_tokens,
        languages,
        corpus_fingerprints,
    };
    Ok((tokenizer, manifest))
}

//! Decoder prefix construction with language-family prompts.
//!
//! With family prompts enabled the prefix is
//! `<SOTP> <family> <SOT> <|lang|> <|transcribe|> [<|notimestamps|>]`;
//! without, it is the plain `<SOT> <|lang|> <|transcribe|> [<|notimestamps|>]`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bpe::Vocabulary;
use crate::error::{Error, Result};
use crate::TokenId;

pub const SOTP: &str = "<SOTP>";
pub const SOT: &str = "<SOT>";
pub const TRANSCRIBE: &str = "<|transcribe|>";
pub const NO_TIMESTAMPS: &str = "<|notimestamps|>";

/// The shipped `families.json`.
pub const DEFAULT_FAMILIES_JSON: &str = r#"{"indo": ["hi", "gu", "mr", "bn"], "dra": ["ta", "te", "kn", "ml"]}"#;

pub fn language_token(code: &str) -> String {
    format!("<|{code}|>")
}

pub fn family_token(family: &str) -> String {
    format!("<{family}>")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageFamilyMap {
    assignments: BTreeMap<String, String>,
    families: BTreeMap<String, String>,
}

impl Default for LanguageFamilyMap {
    fn default() -> Self {
        Self::from_json(DEFAULT_FAMILIES_JSON).expect("default families parse")
    }
}

impl LanguageFamilyMap {
    /// Parses `{"family": ["lang", ...], ...}`. Each family's prompt token is
    /// `<family>`; a language may belong to only one family.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
        let mut assignments = BTreeMap::new();
        let mut families = BTreeMap::new();
        for (family, langs) in raw {
            families.insert(family.clone(), family_token(&family));
            for lang in langs {
                if let Some(prev) = assignments.insert(lang.clone(), family.clone()) {
                    return Err(Error::InvalidConfig(format!(
                        "language `{lang}` listed under both `{prev}` and `{family}`"
                    )));
                }
            }
        }
        Ok(Self {
            assignments,
            families,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn family_of(&self, language: &str) -> Result<&str> {
        self.assignments
            .get(language)
            .map(String::as_str)
            .ok_or_else(|| Error::UnknownLanguage(language.to_string()))
    }

    pub fn prompt_token(&self, family: &str) -> Option<&str> {
        self.families.get(family).map(String::as_str)
    }

    /// Prompt token names of every family, in family-name order.
    pub fn prompt_tokens(&self) -> Vec<String> {
        self.families.values().cloned().collect()
    }

    pub fn languages(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignments
            .iter()
            .map(|(l, f)| (l.as_str(), f.as_str()))
    }
}

/// Human-readable family name for the two shipped families.
pub fn family_label(family: &str) -> Option<&'static str> {
    match family {
        "indo" => Some("Indo-Aryan"),
        "dra" => Some("Dravidian"),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Transcribe,
    Translate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    PrevMarker,
    FamilyPrompt,
    Start,
    Language,
    Task,
    NoTimestamps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSequence {
    pub ids: Vec<TokenId>,
    pub layout: Vec<Slot>,
}

impl PromptSequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn slot(&self, slot: Slot) -> Option<TokenId> {
        self.layout
            .iter()
            .position(|&s| s == slot)
            .map(|i| self.ids[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptOptions {
    pub task: Task,
    pub timestamps: bool,
    pub use_family_prompt: bool,
}

impl Default for PromptOptions {
    fn default() -> Self {
        Self {
            task: Task::Transcribe,
            timestamps: false,
            use_family_prompt: true,
        }
    }
}

pub fn build_prompt(
    language: &str,
    options: PromptOptions,
    vocab: &Vocabulary,
    families: &LanguageFamilyMap,
) -> Result<PromptSequence> {
    if options.task != Task::Transcribe {
        return Err(Error::UnsupportedTask("translate".into()));
    }
    let family = families.family_of(language)?;
    let special = |name: &str| {
        vocab
            .special_id(name)
            .ok_or_else(|| Error::MissingSpecialToken(name.to_string()))
    };

    let mut slots: Vec<(Slot, String)> = Vec::with_capacity(6);
    if options.use_family_prompt {
        let family_tok = families
            .prompt_token(family)
            .expect("every assigned family has a prompt token");
        slots.push((Slot::PrevMarker, SOTP.to_string()));
        slots.push((Slot::FamilyPrompt, family_tok.to_string()));
    }
    slots.push((Slot::Start, SOT.to_string()));
    slots.push((Slot::Language, language_token(language)));
    slots.push((Slot::Task, TRANSCRIBE.to_string()));
    if !options.timestamps {
        slots.push((Slot::NoTimestamps, NO_TIMESTAMPS.to_string()));
    }

    let mut seq = PromptSequence {
        ids: Vec::with_capacity(slots.len()),
        layout: Vec::with_capacity(slots.len()),
    };
    for (slot, name) in slots {
        seq.ids.push(special(&name)?);
        seq.layout.push(slot);
    }
    Ok(seq)
}

/// Concatenated special-token names, e.g. `<SOTP><indo><SOT><|hi|>...`.
pub fn render_prompt(ids: &[TokenId], vocab: &Vocabulary) -> Result<String> {
    let mut out = String::new();
    for &id in ids {
        let token = vocab.get(id).ok_or(Error::UnknownTokenId(id))?;
        out.push_str(&token.text);
    }
    Ok(out)
}

//! Tools for extending a frozen GPT-2 style byte-level BPE tokenizer with
//! per-language merges, building language-family decoder prompts, and
//! measuring how token counts drive autoregressive decoding cost.

pub mod bpe;
pub mod cli;
pub mod decoder;
pub mod error;
pub mod extension;
pub mod prompt;
pub mod report;
pub mod trainer;

pub use bpe::{DecodeMode, MergeTable, Tokenizer, Vocabulary};
pub use error::{Error, Result};

/// Index into a [`Vocabulary`].
pub type TokenId = u32;

//! Byte-level BPE: vocabulary, merge table, pre-tokenization, encode/decode
//! and the on-disk tokenizer formats.

pub mod bytes;
pub mod io;
pub mod merges;
pub mod pretokenize;
pub mod tokenizer;
pub mod vocab;

pub use bytes::ByteSymbolMap;
pub use merges::MergeTable;
pub use pretokenize::{normalize, pretokenize};
pub use tokenizer::{DecodeMode, Tokenizer};
pub use vocab::{Token, Vocabulary};

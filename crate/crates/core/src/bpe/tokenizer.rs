use std::collections::HashMap;
use std::sync::OnceLock;

use aho_corasick::{AhoCorasick, MatchKind};

use crate::bpe::bytes::ByteSymbolMap;
use crate::bpe::merges::MergeTable;
use crate::bpe::pretokenize::pretokenize;
use crate::bpe::vocab::Vocabulary;
use crate::error::{Error, Result};
use crate::TokenId;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DecodeMode {
    #[default]
    Strict,
    /// Invalid UTF-8 is replaced with U+FFFD.
    Lossy,
}

/// A vocabulary plus merge table, compiled for encoding.
#[derive(Debug)]
pub struct Tokenizer {
    vocab: Vocabulary,
    merges: MergeTable,
    byte_ids: [TokenId; 256],
    // (left, right) -> (rank, merged id)
    pair_ranks: HashMap<(TokenId, TokenId), (u32, TokenId)>,
    special_matcher: OnceLock<Option<(AhoCorasick, Vec<TokenId>)>>,
}

impl Clone for Tokenizer {
    fn clone(&self) -> Self {
        Self {
            vocab: self.vocab.clone(),
            merges: self.merges.clone(),
            byte_ids: self.byte_ids,
            pair_ranks: self.pair_ranks.clone(),
            special_matcher: OnceLock::new(),
        }
    }
}

impl Tokenizer {
    pub fn new(vocab: Vocabulary, merges: MergeTable) -> Result<Self> {
        let byte_ids = vocab.byte_ids()?;
        let mut pair_ranks = HashMap::with_capacity(merges.len());
        for (rank, (left, right)) in merges.iter().enumerate() {
            let lookup = |s: &str| {
                vocab
                    .token_id(s)
                    .ok_or_else(|| Error::InvalidMerge(format!("rule {rank}: unknown token `{s}`")))
            };
            let l = lookup(left)?;
            let r = lookup(right)?;
            let merged = lookup(&format!("{left}{right}"))?;
            pair_ranks.insert((l, r), (rank as u32, merged));
        }
        Ok(Self {
            vocab,
            merges,
            byte_ids,
            pair_ranks,
            special_matcher: OnceLock::new(),
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn merges(&self) -> &MergeTable {
        &self.merges
    }

    pub fn into_parts(self) -> (Vocabulary, MergeTable) {
        (self.vocab, self.merges)
    }

    /// Greedy byte-level BPE. Special-token names are treated as plain text.
    pub fn encode(&self, text: &str) -> Vec<TokenId> {
        let mut out = Vec::with_capacity(text.len() / 2);
        self.encode_into(text, &mut out);
        out
    }

    /// Like [`encode`](Self::encode) but validates the input bytes first.
    pub fn encode_bytes(&self, bytes: &[u8]) -> Result<Vec<TokenId>> {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::InvalidUtf8 { line: None })?;
        Ok(self.encode(text))
    }

    /// Encodes with optional whole-string matching of special-token names.
    pub fn encode_with_specials(&self, text: &str, parse_specials: bool) -> Vec<TokenId> {
        if !parse_specials {
            return self.encode(text);
        }
        let Some((matcher, ids)) = self.special_matcher() else {
            return self.encode(text);
        };
        let mut out = Vec::new();
        let mut cursor = 0;
        for m in matcher.find_iter(text) {
            self.encode_into(&text[cursor..m.start()], &mut out);
            out.push(ids[m.pattern().as_usize()]);
            cursor = m.end();
        }
        self.encode_into(&text[cursor..], &mut out);
        out
    }

    pub fn token_count(&self, text: &str) -> usize {
        let mut buf = Vec::new();
        let mut n = 0;
        for chunk in pretokenize(text) {
            buf.clear();
            self.encode_chunk(chunk, &mut buf);
            n += buf.len();
        }
        n
    }

    pub fn decode(&self, ids: &[TokenId], mode: DecodeMode) -> Result<String> {
        let bytes = self.decode_bytes(ids)?;
        match mode {
            DecodeMode::Strict => String::from_utf8(bytes).map_err(|e| {
                Error::InvalidByteSequence {
                    valid_up_to: e.utf8_error().valid_up_to(),
                }
            }),
            DecodeMode::Lossy => Ok(String::from_utf8_lossy(&bytes).into_owned()),
        }
    }

    /// Raw bytes of a token sequence; special tokens contribute their names.
    pub fn decode_bytes(&self, ids: &[TokenId]) -> Result<Vec<u8>> {
        let map = ByteSymbolMap::global();
        let mut bytes = Vec::with_capacity(ids.len() * 3);
        for &id in ids {
            let token = self.vocab.get(id).ok_or(Error::UnknownTokenId(id))?;
            if token.special {
                bytes.extend_from_slice(token.text.as_bytes());
            } else if !map.decode_into(&token.text, &mut bytes) {
                return Err(Error::MalformedVocab(format!(
                    "token {id} `{}` contains a char outside the byte alphabet",
                    token.text
                )));
            }
        }
        Ok(bytes)
    }

    fn special_matcher(&self) -> Option<&(AhoCorasick, Vec<TokenId>)> {
        self.special_matcher
            .get_or_init(|| {
                if self.vocab.num_specials() == 0 {
                    return None;
                }
                let (names, ids): (Vec<&str>, Vec<TokenId>) = self.vocab.specials().unzip();
                let ac = AhoCorasick::builder()
                    .match_kind(MatchKind::LeftmostLongest)
                    .build(names)
                    .expect("special token automaton builds");
                Some((ac, ids))
            })
            .as_ref()
    }

    fn encode_into(&self, text: &str, out: &mut Vec<TokenId>) {
        for chunk in pretokenize(text) {
            self.encode_chunk(chunk, out);
        }
    }

    fn encode_chunk(&self, chunk: &str, out: &mut Vec<TokenId>) {
        let start = out.len();
        out.extend(chunk.bytes().map(|b| self.byte_ids[b as usize]));
        let word = &mut out[start..];
        let mut len = word.len();
        while len > 1 {
            let mut best: Option<(u32, usize, TokenId)> = None;
            for i in 0..len - 1 {
                if let Some(&(rank, merged)) = self.pair_ranks.get(&(word[i], word[i + 1])) {
                    // strict `<` keeps the leftmost occurrence on equal rank
                    if best.is_none_or(|(r, _, _)| rank < r) {
                        best = Some((rank, i, merged));
                    }
                }
            }
            let Some((_, i, merged)) = best else { break };
            word[i] = merged;
            word.copy_within(i + 2..len, i + 1);
            len -= 1;
        }
        out.truncate(start + len);
    }
}

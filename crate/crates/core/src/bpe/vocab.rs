use std::collections::{BTreeMap, HashMap};

use crate::bpe::bytes::ByteSymbolMap;
use crate::error::{Error, Result};
use crate::TokenId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub special: bool,
}

/// Dense id <-> token-string map. Ordinary tokens are byte-symbol strings;
/// special tokens are stored under their surface name.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    tokens: Vec<Token>,
    ordinary: HashMap<String, TokenId>,
    specials: BTreeMap<String, TokenId>,
    base_size: usize,
}

// Equality is over the id <-> token mapping; `base_size` is bookkeeping.
impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
    }
}

impl Eq for Vocabulary {}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// The 256 single-byte tokens in byte order, and nothing else.
    pub fn byte_level() -> Self {
        let map = ByteSymbolMap::global();
        let mut vocab = Self::new();
        for b in 0..=255u8 {
            vocab
                .push_ordinary(map.symbol(b).to_string())
                .expect("byte symbols are distinct");
        }
        vocab.mark_base();
        vocab
    }

    /// Builds a vocabulary from `(token, id, special)` triples in any order.
    /// The ids must be exactly `0..n` and the strings distinct.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, TokenId, bool)>,
    {
        let mut slots: Vec<Option<Token>> = Vec::new();
        for (text, id, special) in entries {
            let idx = id as usize;
            if idx >= slots.len() {
                slots.resize(idx + 1, None);
            }
            if slots[idx].is_some() {
                return Err(Error::MalformedVocab(format!("id {id} assigned twice")));
            }
            slots[idx] = Some(Token { text, special });
        }
        let mut vocab = Self::new();
        for (id, slot) in slots.into_iter().enumerate() {
            let token =
                slot.ok_or_else(|| Error::MalformedVocab(format!("id {id} is unassigned")))?;
            if token.special {
                vocab.push_special(token.text)?;
            } else {
                vocab.push_ordinary(token.text)?;
            }
        }
        vocab.mark_base();
        Ok(vocab)
    }

    fn check_free(&self, text: &str) -> Result<()> {
        if self.ordinary.contains_key(text) || self.specials.contains_key(text) {
            return Err(Error::MalformedVocab(format!("token `{text}` defined twice")));
        }
        Ok(())
    }

    pub fn push_ordinary(&mut self, text: String) -> Result<TokenId> {
        self.check_free(&text)?;
        let id = self.tokens.len() as TokenId;
        self.ordinary.insert(text.clone(), id);
        self.tokens.push(Token {
            text,
            special: false,
        });
        Ok(id)
    }

    pub fn push_special(&mut self, name: String) -> Result<TokenId> {
        if self.specials.contains_key(&name) {
            return Err(Error::DuplicateSpecialName(name));
        }
        self.check_free(&name)?;
        let id = self.tokens.len() as TokenId;
        self.specials.insert(name.clone(), id);
        self.tokens.push(Token {
            text: name,
            special: true,
        });
        Ok(id)
    }

    /// Records the current size as the frozen base size.
    pub fn mark_base(&mut self) {
        self.base_size = self.tokens.len();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn get(&self, id: TokenId) -> Option<&Token> {
        self.tokens.get(id as usize)
    }

    pub fn token_id(&self, text: &str) -> Option<TokenId> {
        self.ordinary.get(text).copied()
    }

    pub fn special_id(&self, name: &str) -> Option<TokenId> {
        self.specials.get(name).copied()
    }

    pub fn contains(&self, text: &str) -> bool {
        self.ordinary.contains_key(text) || self.specials.contains_key(text)
    }

    pub fn specials(&self) -> impl Iterator<Item = (&str, TokenId)> {
        self.specials.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn num_specials(&self) -> usize {
        self.specials.len()
    }

    /// All tokens in id order.
    pub fn iter(&self) -> impl Iterator<Item = (TokenId, &Token)> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (i as TokenId, t))
    }

    /// Id of the single-byte token for every byte value.
    pub fn byte_ids(&self) -> Result<[TokenId; 256]> {
        let map = ByteSymbolMap::global();
        let mut ids = [0; 256];
        for b in 0..=255u8 {
            let mut buf = [0u8; 4];
            let sym = map.symbol(b).encode_utf8(&mut buf);
            ids[b as usize] = self.token_id(sym).ok_or(Error::MissingByteToken(b))?;
        }
        Ok(ids)
    }
}

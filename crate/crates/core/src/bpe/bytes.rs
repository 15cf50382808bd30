//! Reversible mapping between raw bytes and printable code points, so that
//! byte-level tokens can be stored as ordinary strings in `vocab.json`.

use std::collections::HashMap;
use std::sync::OnceLock;

#[derive(Debug)]
pub struct ByteSymbolMap {
    forward: [char; 256],
    inverse: HashMap<char, u8>,
}

impl ByteSymbolMap {
    /// The GPT-2 table: printable Latin-1 bytes map to themselves, every other
    /// byte is shifted to `U+0100 + n` in byte order.
    fn gpt2() -> Self {
        let printable = |b: u8| matches!(b, b'!'..=b'~' | 0xA1..=0xAC | 0xAE..=0xFF);
        let mut forward = ['\0'; 256];
        let mut shifted = 0u32;
        for b in 0..=255u8 {
            forward[b as usize] = if printable(b) {
                char::from(b)
            } else {
                let c = char::from_u32(256 + shifted).expect("U+0100..U+0143 are valid");
                shifted += 1;
                c
            };
        }
        let inverse = forward
            .iter()
            .enumerate()
            .map(|(b, &c)| (c, b as u8))
            .collect();
        Self { forward, inverse }
    }

    pub fn global() -> &'static ByteSymbolMap {
        static MAP: OnceLock<ByteSymbolMap> = OnceLock::new();
        MAP.get_or_init(ByteSymbolMap::gpt2)
    }

    #[inline]
    pub fn symbol(&self, byte: u8) -> char {
        self.forward[byte as usize]
    }

    #[inline]
    pub fn byte(&self, symbol: char) -> Option<u8> {
        self.inverse.get(&symbol).copied()
    }

    /// Maps raw bytes to their symbol string.
    pub fn encode(&self, bytes: &[u8]) -> String {
        bytes.iter().map(|&b| self.symbol(b)).collect()
    }

    /// Maps a symbol string back to bytes; `None` if a char is outside the table.
    pub fn decode(&self, symbols: &str) -> Option<Vec<u8>> {
        symbols.chars().map(|c| self.byte(c)).collect()
    }

    /// Appends the bytes of `symbols` to `out`, returning false on an unmapped char.
    pub(crate) fn decode_into(&self, symbols: &str, out: &mut Vec<u8>) -> bool {
        for c in symbols.chars() {
            match self.byte(c) {
                Some(b) => out.push(b),
                None => return false,
            }
        }
        true
    }
}

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};
use crate::TokenId;

const MAGIC: &[u8; 8] = b"GTHEAD1\0";
const FALLBACK_STD: f64 = 0.02;

/// Output projection from hidden state to vocabulary logits, stored
/// row-major with one row per token.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenHead {
    weights: Vec<f32>,
    bias: Option<Vec<f32>>,
    vocab_size: usize,
    hidden_dim: usize,
}

fn check_finite(values: &[f32]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput)
    }
}

impl TokenHead {
    pub fn new(
        weights: Vec<f32>,
        bias: Option<Vec<f32>>,
        vocab_size: usize,
        hidden_dim: usize,
    ) -> Result<Self> {
        if hidden_dim == 0 {
            return Err(Error::InvalidConfig("hidden_dim must be at least 1".into()));
        }
        if weights.len() != vocab_size * hidden_dim {
            return Err(Error::DimensionMismatch {
                expected: vocab_size * hidden_dim,
                found: weights.len(),
            });
        }
        check_finite(&weights)?;
        if let Some(b) = &bias {
            if b.len() != vocab_size {
                return Err(Error::DimensionMismatch {
                    expected: vocab_size,
                    found: b.len(),
                });
            }
            check_finite(b)?;
        }
        Ok(Self {
            weights,
            bias,
            vocab_size,
            hidden_dim,
        })
    }

    pub fn zeros(vocab_size: usize, hidden_dim: usize) -> Result<Self> {
        Self::new(vec![0.0; vocab_size * hidden_dim], None, vocab_size, hidden_dim)
    }

    /// Gaussian rows with std `0.02`, no bias.
    pub fn random(vocab_size: usize, hidden_dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, FALLBACK_STD).expect("valid std");
        let weights = (0..vocab_size * hidden_dim)
            .map(|_| rng.sample::<f64, _>(dist) as f32)
            .collect();
        Self::new(weights, None, vocab_size, hidden_dim)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> Option<&[f32]> {
        self.bias.as_deref()
    }

    pub fn row(&self, id: TokenId) -> Option<&[f32]> {
        let i = id as usize;
        (i < self.vocab_size).then(|| &self.weights[i * self.hidden_dim..(i + 1) * self.hidden_dim])
    }

    /// Mean over rows of the population standard deviation of each row.
    pub fn mean_row_std(&self) -> f64 {
        if self.vocab_size == 0 {
            return 0.0;
        }
        let d = self.hidden_dim as f64;
        let total: f64 = self
            .weights
            .chunks_exact(self.hidden_dim)
            .map(|row| {
                let mean = row.iter().map(|&v| v as f64).sum::<f64>() / d;
                let var = row.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / d;
                var.sqrt()
            })
            .sum();
        total / self.vocab_size as f64
    }

    /// `weights · hidden + bias` for every token.
    pub fn logits(&self, hidden: &[f32]) -> Result<Vec<f32>> {
        if hidden.len() != self.hidden_dim {
            return Err(Error::DimensionMismatch {
                expected: self.hidden_dim,
                found: hidden.len(),
            });
        }
        check_finite(hidden)?;
        let mut out: Vec<f32> = self
            .weights
            .chunks_exact(self.hidden_dim)
            .map(|row| dot(row, hidden))
            .collect();
        if let Some(bias) = &self.bias {
            for (o, b) in out.iter_mut().zip(bias) {
                *o += b;
            }
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::with_capacity(25 + 4 * (self.weights.len() + self.vocab_size));
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.vocab_size as u64).to_le_bytes());
        buf.extend_from_slice(&(self.hidden_dim as u64).to_le_bytes());
        buf.push(self.bias.is_some() as u8);
        for v in self.weights.iter().chain(self.bias.iter().flatten()) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        fs::File::create(path)
            .and_then(|mut f| f.write_all(&buf))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidConfig(format!("token head file: {msg}"));
        if bytes.len() < 25 || &bytes[..8] != MAGIC {
            return Err(bad("bad header"));
        }
        let vocab_size = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let hidden_dim = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
        let has_bias = match bytes[24] {
            0 => false,
            1 => true,
            _ => return Err(bad("bad bias flag")),
        };
        let n_weights = vocab_size
            .checked_mul(hidden_dim)
            .ok_or_else(|| bad("size overflow"))?;
        let n_total = n_weights + if has_bias { vocab_size } else { 0 };
        let body = &bytes[25..];
        if body.len() != n_total * 4 {
            return Err(bad("truncated or oversized body"));
        }
        let mut floats: Vec<f32> = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let bias = has_bias.then(|| floats.split_off(n_weights));
        Self::new(floats, bias, vocab_size, hidden_dim)
    }
}

/// Dot product with eight independent accumulators so the loop vectorizes.
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0f32; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    let mut sum = acc.iter().sum::<f32>();
    for (x, y) in ra.iter().zip(rb) {
        sum += x * y;
    }
    sum
}

/// Appends `k` rows drawn from `N(0, s)`, where `s` is the mean per-row std of
/// the existing rows. Existing rows and bias entries are copied unchanged; new
/// bias entries are zero.
pub fn expand_head(head: &TokenHead, k: usize, seed: u64) -> TokenHead {
    let mut out = head.clone();
    if k == 0 {
        return out;
    }
    let std = match head.mean_row_std() {
        s if s > 0.0 && s.is_finite() => s,
        _ => FALLBACK_STD,
    };
    let dist = Normal::new(0.0, std).expect("positive std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.weights.reserve(k * head.hidden_dim);
    out.weights
        .extend((0..k * head.hidden_dim).map(|_| rng.sample::<f64, _>(dist) as f32));
    if let Some(bias) = &mut out.bias {
        bias.resize(head.vocab_size + k, 0.0);
    }
    out.vocab_size += k;
    out
}

/// Softmax over the head's logits (max-subtracted, accumulated in f64) and
/// its argmax, lowest id first on ties.
pub fn predict_next(head: &TokenHead, hidden: &[f32]) -> Result<(TokenId, Vec<f64>)> {
    let logits = head.logits(hidden)?;
    check_finite(&logits)?;
    let mut best = 0usize;
    for (i, &l) in logits.iter().enumerate() {
        if l > logits[best] {
            best = i;
        }
    }
    let Some(&max) = logits.get(best) else {
        return Ok((0, Vec::new()));
    };
    let max = max as f64;
    let mut probs: Vec<f64> = logits.iter().map(|&l| (l as f64 - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= z;
    }
    Ok((best as TokenId, probs))
}

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::head::{dot, predict_next, TokenHead};
use crate::error::{Error, Result};
use crate::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyDecoderConfig {
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub rng_seed: u64,
}

impl Default for ToyDecoderConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 256,
            num_layers: 4,
            rng_seed: 0,
        }
    }
}

impl ToyDecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 || self.num_layers == 0 {
            return Err(Error::InvalidConfig(
                "hidden_dim and num_layers must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

struct Layer {
    wq: Vec<f32>,
    wk: Vec<f32>,
    wv: Vec<f32>,
    wo: Vec<f32>,
    w_up: Vec<f32>,
    w_down: Vec<f32>,
}

/// Pre-norm transformer decoder with single-head attention, a ReLU MLP of
/// width `4 * hidden_dim`, sinusoidal positions, and input embeddings tied to
/// the token head rows.
pub struct ToyDecoder {
    config: ToyDecoderConfig,
    layers: Vec<Layer>,
}

#[derive(Default)]
struct KvCache {
    keys: Vec<Vec<f32>>,
    values: Vec<Vec<f32>>,
}

fn matvec(w: &[f32], x: &[f32], out: &mut [f32]) {
    for (o, row) in out.iter_mut().zip(w.chunks_exact(x.len())) {
        *o = dot(row, x);
    }
}

fn rms_norm(x: &[f32], out: &mut [f32]) {
    let ms = x.iter().map(|v| v * v).sum::<f32>() / x.len() as f32;
    let scale = 1.0 / (ms + 1e-6).sqrt();
    for (o, v) in out.iter_mut().zip(x) {
        *o = v * scale;
    }
}

impl ToyDecoder {
    pub fn new(config: ToyDecoderConfig) -> Result<Self> {
        config.validate()?;
        let d = config.hidden_dim;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let mut mat = |rows: usize, cols: usize| -> Vec<f32> {
            let dist = Normal::new(0.0, 1.0 / (cols as f64).sqrt()).expect("positive std");
            (0..rows * cols).map(|_| rng.sample::<f64, _>(dist) as f32).collect()
        };
        let layers = (0..config.num_layers)
            .map(|_| Layer {
                wq: mat(d, d),
                wk: mat(d, d),
                wv: mat(d, d),
                wo: mat(d, d),
                w_up: mat(4 * d, d),
                w_down: mat(d, 4 * d),
            })
            .collect();
        Ok(Self { config, layers })
    }

    pub fn config(&self) -> &ToyDecoderConfig {
        &self.config
    }

    /// Runs one position through every layer, appending to the caches, and
    /// returns the normalized final hidden state.
    fn forward(&self, head: &TokenHead, token: TokenId, pos: usize, caches: &mut [KvCache]) -> Result<Vec<f32>> {
        let d = self.config.hidden_dim;
        let emb = head.row(token).ok_or(Error::UnknownTokenId(token))?;
        let mut x: Vec<f32> = emb
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let freq = 1.0 / 10000f32.powf((2 * (i / 2)) as f32 / d as f32);
                let angle = pos as f32 * freq;
                e + if i % 2 == 0 { angle.sin() } else { angle.cos() }
            })
            .collect();
        let mut h = vec![0f32; d];
        let mut q = vec![0f32; d];
        let mut attn = vec![0f32; d];
        let mut proj = vec![0f32; d];
        let mut up = vec![0f32; 4 * d];
        let inv_sqrt_d = 1.0 / (d as f32).sqrt();

        for (layer, cache) in self.layers.iter().zip(caches.iter_mut()) {
            rms_norm(&x, &mut h);
            matvec(&layer.wq, &h, &mut q);
            let mut k = vec![0f32; d];
            let mut v = vec![0f32; d];
            matvec(&layer.wk, &h, &mut k);
            matvec(&layer.wv, &h, &mut v);
            cache.keys.push(k);
            cache.values.push(v);

            let scores: Vec<f32> = cache.keys.iter().map(|k| dot(&q, k) * inv_sqrt_d).collect();
            let max = scores.iter().copied().fold(f32::NEG_INFINITY, f32::max);
            let weights: Vec<f32> = scores.iter().map(|s| (s - max).exp()).collect();
            let z: f32 = weights.iter().sum();
            attn.iter_mut().for_each(|a| *a = 0.0);
            for (w, v) in weights.iter().zip(&cache.values) {
                let w = w / z;
                for (a, vi) in attn.iter_mut().zip(v) {
                    *a += w * vi;
                }
            }
            matvec(&layer.wo, &attn, &mut proj);
            for (xi, p) in x.iter_mut().zip(&proj) {
                *xi += p;
            }

            rms_norm(&x, &mut h);
            matvec(&layer.w_up, &h, &mut up);
            up.iter_mut().for_each(|u| *u = u.max(0.0));
            matvec(&layer.w_down, &up, &mut proj);
            for (xi, p) in x.iter_mut().zip(&proj) {
                *xi += p;
            }
        }
        let mut out = vec![0f32; d];
        rms_norm(&x, &mut out);
        Ok(out)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepTimings {
    /// Time to process the prompt.
    pub prefill: Duration,
    /// Wall-clock time of each generated token.
    pub steps: Vec<Duration>,
}

impl StepTimings {
    /// Total generation time, excluding the prompt.
    pub fn generation(&self) -> Duration {
        self.steps.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub tokens: Vec<TokenId>,
    pub timings: StepTimings,
}

/// Greedy decoding with a key/value cache: each step feeds the previous
/// token, attends over the whole history, and takes the argmax. Stops after
/// emitting `stop_id` or `max_new` tokens.
pub fn greedy_decode(
    decoder: &ToyDecoder,
    head: &TokenHead,
    prompt: &[TokenId],
    max_new: usize,
    stop_id: Option<TokenId>,
) -> Result<DecodeOutput> {
    if head.hidden_dim() != decoder.config.hidden_dim {
        return Err(Error::DimensionMismatch {
            expected: decoder.config.hidden_dim,
            found: head.hidden_dim(),
        });
    }
    if prompt.is_empty() {
        return Err(Error::InvalidConfig("prompt must not be empty".into()));
    }
    let mut caches: Vec<KvCache> = (0..decoder.layers.len()).map(|_| KvCache::default()).collect();
    let mut timings = StepTimings::default();
    let mut tokens = Vec::with_capacity(max_new);
    if max_new == 0 {
        return Ok(DecodeOutput { tokens, timings });
    }

    let start = Instant::now();
    let mut hidden = Vec::new();
    for (pos, &tok) in prompt.iter().enumerate() {
        hidden = decoder.forward(head, tok, pos, &mut caches)?;
    }
    timings.prefill = start.elapsed();

    let mut pos = prompt.len();
    for step in 0..max_new {
        let start = Instant::now();
        if step > 0 {
            hidden = decoder.forward(head, tokens[step - 1], pos, &mut caches)?;
            pos += 1;
        }
        let (id, _) = predict_next(head, &hidden)?;
        timings.steps.push(start.elapsed());
        tokens.push(id);
        if Some(id) == stop_id {
            break;
        }
    }
    Ok(DecodeOutput { tokens, timings })
}

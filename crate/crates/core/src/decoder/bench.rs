use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::cost::{fit_cost, median, predicted_speedup, CostSample, DecodeCostFit, MIN_DISTINCT_N, MIN_RUNS};
use super::head::TokenHead;
use super::model::{greedy_decode, ToyDecoder, ToyDecoderConfig};
use crate::error::{Error, Result};
use crate::TokenId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub decoder: ToyDecoderConfig,
    /// Rows in the randomly initialized head.
    pub vocab_size: usize,
    pub ns: Vec<usize>,
    pub runs: usize,
    /// Untimed decodes before measuring each `n`.
    pub warmup: usize,
    /// `(n_base, n_ext)` token-count pairs to compare.
    pub pairs: Vec<(usize, usize)>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            decoder: ToyDecoderConfig::default(),
            vocab_size: 4096,
            ns: vec![32, 64, 128, 256, 512],
            runs: 3,
            warmup: 1,
            pairs: vec![(79, 31), (27, 19)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSample {
    pub n: usize,
    pub runs_ms: Vec<f64>,
    pub median_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Speedup {
    pub n_base: usize,
    pub n_ext: usize,
    /// `T(n_base) / T(n_ext)` under the fitted model.
    pub ratio: f64,
    /// Ratio of median measured generation times.
    pub measured_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub samples: Vec<BenchSample>,
    pub fit: DecodeCostFit,
    pub speedups: Vec<Speedup>,
}

struct Runner {
    decoder: ToyDecoder,
    head: TokenHead,
    prompt: Vec<TokenId>,
    runs: usize,
    warmup: usize,
}

impl Runner {
    /// Generation time in milliseconds for each timed run of `n` tokens.
    fn time(&self, n: usize) -> Result<Vec<f64>> {
        for _ in 0..self.warmup {
            greedy_decode(&self.decoder, &self.head, &self.prompt, n, None)?;
        }
        (0..self.runs)
            .map(|_| {
                let out = greedy_decode(&self.decoder, &self.head, &self.prompt, n, None)?;
                Ok(out.timings.generation().as_secs_f64() * 1e3)
            })
            .collect()
    }
}

/// Times greedy decoding at every `n`, fits the cost model, and compares each
/// token-count pair both under the fit and by direct measurement.
pub fn run_bench(config: &BenchConfig) -> Result<BenchResult> {
    let distinct: BTreeSet<usize> = config.ns.iter().copied().collect();
    if distinct.len() < MIN_DISTINCT_N || config.runs < MIN_RUNS {
        return Err(Error::InsufficientSamples {
            distinct: distinct.len(),
            required: MIN_DISTINCT_N,
            min_runs: MIN_RUNS,
        });
    }
    for &(n_base, n_ext) in &config.pairs {
        if n_ext < 1 || n_base < n_ext {
            return Err(Error::InvalidTokenCounts { n_base, n_ext });
        }
    }
    if config.vocab_size == 0 {
        return Err(Error::InvalidConfig("vocab_size must be at least 1".into()));
    }
    let decoder = ToyDecoder::new(config.decoder)?;
    let head = TokenHead::random(
        config.vocab_size,
        config.decoder.hidden_dim,
        config.decoder.rng_seed.wrapping_add(1),
    )?;
    let prompt = (0..6).map(|i| (i % config.vocab_size) as TokenId).collect();
    let runner = Runner {
        decoder,
        head,
        prompt,
        runs: config.runs,
        warmup: config.warmup,
    };

    let mut samples = Vec::with_capacity(distinct.len());
    let mut cost = Vec::new();
    for &n in &distinct {
        let runs_ms = runner.time(n)?;
        cost.extend(runs_ms.iter().map(|&ms| CostSample { n, seconds: ms / 1e3 }));
        samples.push(BenchSample {
            n,
            median_ms: median(&runs_ms),
            runs_ms,
        });
    }
    let fit = fit_cost(&cost)?;

    let mut speedups = Vec::with_capacity(config.pairs.len());
    for &(n_base, n_ext) in &config.pairs {
        let ratio = predicted_speedup(&fit, n_base, n_ext)?;
        let measured_ratio = if n_base == n_ext {
            1.0
        } else {
            median(&runner.time(n_base)?) / median(&runner.time(n_ext)?)
        };
        speedups.push(Speedup {
            n_base,
            n_ext,
            ratio,
            measured_ratio,
        });
    }
    Ok(BenchResult {
        samples,
        fit,
        speedups,
    })
}

//! Token head expansion, a toy autoregressive decoder, and decoding-cost fits.

mod bench;
mod cost;
mod head;
mod model;

pub use bench::{run_bench, BenchConfig, BenchResult, BenchSample, Speedup};
pub use cost::{fit_cost, median, predicted_speedup, CostSample, DecodeCostFit, MIN_DISTINCT_N, MIN_RUNS};
pub use head::{expand_head, predict_next, TokenHead};
pub use model::{greedy_decode, DecodeOutput, StepTimings, ToyDecoder, ToyDecoderConfig};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_DISTINCT_N: usize = 5;
pub const MIN_RUNS: usize = 3;

/// One timed decode of `n` tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSample {
    pub n: usize,
    pub seconds: f64,
}

/// `T(N) = a*N + b*N^2` with `a, b >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeCostFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

impl DecodeCostFit {
    pub fn eval(&self, n: f64) -> f64 {
        self.a * n + self.b * n * n
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.is_empty() {
        f64::NAN
    } else if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn sse(points: &[(f64, f64)], a: f64, b: f64) -> f64 {
    points.iter().map(|&(n, t)| (t - a * n - b * n * n).powi(2)).sum()
}

/// Fits the median time at each `n` by non-negative least squares. Requires
/// at least five distinct `n`, each timed at least three times.
pub fn fit_cost(samples: &[CostSample]) -> Result<DecodeCostFit> {
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.n).or_default().push(s.seconds);
    }
    let distinct = groups.len();
    if distinct < MIN_DISTINCT_N || groups.values().any(|g| g.len() < MIN_RUNS) {
        return Err(Error::InsufficientSamples {
            distinct,
            required: MIN_DISTINCT_N,
            min_runs: MIN_RUNS,
        });
    }
    let points: Vec<(f64, f64)> = groups.iter().map(|(&n, g)| (n as f64, median(g))).collect();
    if points.iter().any(|&(_, t)| !t.is_finite()) {
        return Err(Error::NonFiniteInput);
    }

    // normal equations for x1 = n, x2 = n^2
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(n, t) in &points {
        let n2 = n * n;
        s11 += n * n;
        s12 += n * n2;
        s22 += n2 * n2;
        s1y += n * t;
        s2y += n2 * t;
    }
    let mut candidates = Vec::with_capacity(3);
    let det = s11 * s22 - s12 * s12;
    if det.abs() > f64::EPSILON * s11 * s22 {
        let a = (s1y * s22 - s2y * s12) / det;
        let b = (s2y * s11 - s1y * s12) / det;
        if a >= 0.0 && b >= 0.0 {
            candidates.push((a, b));
        }
    }
    if s11 > 0.0 {
        candidates.push(((s1y / s11).max(0.0), 0.0));
    }
    if s22 > 0.0 {
        candidates.push((0.0, (s2y / s22).max(0.0)));
    }
    candidates.push((0.0, 0.0));
    let (a, b) = candidates
        .into_iter()
        .min_by(|x, y| sse(&points, x.0, x.1).total_cmp(&sse(&points, y.0, y.1)))
        .expect("at least one candidate");

    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let sst: f64 = points.iter().map(|&(_, t)| (t - mean).powi(2)).sum();
    let residual = sse(&points, a, b);
    let r_squared = if sst > 0.0 {
        (1.0 - residual / sst).clamp(0.0, 1.0)
    } else if residual == 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(DecodeCostFit { a, b, r_squared })
}

/// `T(n_base) / T(n_ext)` under the fit.
pub fn predicted_speedup(fit: &DecodeCostFit, n_base: usize, n_ext: usize) -> Result<f64> {
    if n_ext < 1 || n_base < n_ext {
        return Err(Error::InvalidTokenCounts { n_base, n_ext });
    }
    if n_base == n_ext {
        return Ok(1.0);
    }
    let den = fit.eval(n_ext as f64);
    if den <= 0.0 {
        return Ok(1.0);
    }
    Ok(fit.eval(n_base as f64) / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(f: impl Fn(f64) -> f64) -> Vec<CostSample> {
        [32, 64, 128, 256, 512]
            .iter()
            .flat_map(|&n| (0..3).map(move |_| n))
            .map(|n| CostSample { n, seconds: f(n as f64) })
            .collect()
    }

    #[test]
    fn exact_linear() {
        let fit = fit_cost(&samples(|n| 2.0 * n)).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-9 && fit.b.abs() < 1e-12, "{fit:?}");
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_quadratic() {
        let fit = fit_cost(&samples(|n| n * n)).unwrap();
        assert!(fit.a.abs() < 1e-6 && (fit.b - 1.0).abs() < 1e-9, "{fit:?}");
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_coefficient_is_clamped() {
        // 10n - 0.001 n^2 would need b < 0
        let fit = fit_cost(&samples(|n| 10.0 * n - 0.001 * n * n)).unwrap();
        assert!(fit.a >= 0.0 && fit.b == 0.0);
    }

    #[test]
    fn insufficient() {
        let mut s = samples(|n| n);
        s.retain(|x| x.n != 32);
        assert!(matches!(fit_cost(&s), Err(Error::InsufficientSamples { distinct: 4, .. })));
        let mut s = samples(|n| n);
        s.pop();
        assert!(fit_cost(&s).is_err());
    }

    #[test]
    fn speedups() {
        let lin = DecodeCostFit { a: 1.0, b: 0.0, r_squared: 1.0 };
        assert!((predicted_speedup(&lin, 79, 31).unwrap() - 79.0 / 31.0).abs() < 1e-12);
        let quad = DecodeCostFit { a: 0.0, b: 1.0, r_squared: 1.0 };
        assert!((predicted_speedup(&quad, 27, 19).unwrap() - (27.0f64 / 19.0).powi(2)).abs() < 1e-12);
        assert_eq!(predicted_speedup(&quad, 40, 40).unwrap(), 1.0);
        assert!(matches!(predicted_speedup(&lin, 5, 0), Err(Error::InvalidTokenCounts { .. })));
        assert!(predicted_speedup(&lin, 3, 5).is_err());
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}

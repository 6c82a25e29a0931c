//! Histogram Otsu thresholding.
//!
//! Samples are binned into [`OTSU_BINS`] uniform bins over `[min, max]`; the value
//! `max` falls in the last bin. Candidate `k` splits bins `0..=k` from `k+1..`,
//! and is scored by the between-class variance `ω₀ω₁(μ₀ − μ₁)²` with class means
//! taken over bin indices. The returned threshold is the upper edge of the
//! winning bin, `min + (k + 1)·width`; ties go to the smallest edge.

use super::EngineError;

pub const OTSU_BINS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtsuFit {
    pub threshold: f64,
    /// Index of the last bin in the lower class.
    pub bin: usize,
    pub between_variance: f64,
    pub min: f64,
    pub max: f64,
}

pub fn otsu_threshold(samples: &[f64]) -> Result<f64, EngineError> {
    otsu_fit(samples).map(|f| f.threshold)
}

pub fn otsu_fit(samples: &[f64]) -> Result<OtsuFit, EngineError> {
    if samples.len() < 2 {
        return Err(EngineError::degenerate(format!("{} samples, need at least 2", samples.len())));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(EngineError::degenerate("non-finite sample"));
    }
    let (min, max) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if max <= min {
        return Err(EngineError::degenerate(format!("all samples equal {min}")));
    }
    let width = (max - min) / OTSU_BINS as f64;

    let mut counts = [0u64; OTSU_BINS];
    for &v in samples {
        counts[bin_of(v, min, width)] += 1;
    }
    let total = samples.len() as u64;
    let index_sum: u64 = counts.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();

    let mut best = (f64::NEG_INFINITY, 0usize);
    let (mut n0, mut s0) = (0u64, 0u64);
    for (k, &count) in counts.iter().enumerate().take(OTSU_BINS - 1) {
        n0 += count;
        s0 += k as u64 * count;
        let var = between_class_variance(n0, s0, total - n0, index_sum - s0);
        if var > best.0 {
            best = (var, k);
        }
    }
    let (between_variance, bin) = best;
    Ok(OtsuFit { threshold: min + (bin + 1) as f64 * width, bin, between_variance, min, max })
}

#[inline]
fn bin_of(v: f64, min: f64, width: f64) -> usize {
    (((v - min) / width).floor() as usize).min(OTSU_BINS - 1)
}

/// `ω₀ω₁(μ₀ − μ₁)²` from class counts and bin-index sums; zero if a class is empty.
fn between_class_variance(n0: u64, s0: u64, n1: u64, s1: u64) -> f64 {
    if n0 == 0 || n1 == 0 {
        return 0.0;
    }
    let total = (n0 + n1) as f64;
    let w0 = n0 as f64 / total;
    let w1 = n1 as f64 / total;
    let mu0 = s0 as f64 / n0 as f64;
    let mu1 = s1 as f64 / n1 as f64;
    w0 * w1 * (mu0 - mu1) * (mu0 - mu1)
}

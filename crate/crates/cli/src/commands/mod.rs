pub mod fit_mixture;
pub mod fit_sbm;
pub mod partition;
pub mod sg;
pub mod simulate;

use stirling_gamma::diagnostics::{effective_sample_size_with, EssMethod};
use stirling_gamma::special::digamma;

use crate::error::CliResult;

/// E(K_n | α) = α(ψ(α + n) − ψ(α)).
pub fn expected_clusters(alpha: f64, n: usize) -> CliResult<f64> {
    Ok(alpha * (digamma(alpha + n as f64)? - digamma(alpha)?))
}

/// Normalized counts of values in 1..=max, indexed from 1.
pub fn pooled_histogram<'a>(traces: impl Iterator<Item = &'a [usize]>, max: usize) -> Vec<f64> {
    let mut h = vec![0.0; max];
    let mut total = 0usize;
    for t in traces {
        for &k in t {
            h[k - 1] += 1.0;
            total += 1;
        }
    }
    h.iter_mut().for_each(|v| *v /= total.max(1) as f64);
    h
}

pub fn mode_of(hist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in hist.iter().enumerate() {
        if p > hist[best] {
            best = i;
        }
    }
    best + 1
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

/// ESS of a trace, as JSON null when undefined (for instance a fixed α).
pub fn ess(trace: &[f64], method: EssMethod) -> serde_json::Value {
    effective_sample_size_with(trace, method)
        .map_or(serde_json::Value::Null, serde_json::Value::from)
}

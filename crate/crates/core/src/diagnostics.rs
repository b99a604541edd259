//! Chain and agreement diagnostics: effective sample size, adjusted Rand
//! index, total variation, and Kolmogorov–Smirnov and chi-square tests.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::special::gamma_p;

/// Truncation rule for the autocorrelation sum in [`effective_sample_size_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EssMethod {
    /// Geyer's initial monotone sequence.
    #[default]
    InitialMonotone,
    /// Geyer's initial positive sequence.
    InitialPositive,
}

/// Effective sample size by Geyer's initial monotone sequence estimator.
/// Returns `None` for traces shorter than 4 or with zero variance.
pub fn effective_sample_size(trace: &[f64]) -> Option<f64> {
    effective_sample_size_with(trace, EssMethod::InitialMonotone)
}

pub fn effective_sample_size_with(trace: &[f64], method: EssMethod) -> Option<f64> {
    let n = trace.len();
    if n < 4 {
        return None;
    }
    let mean = trace.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = trace.iter().map(|x| x - mean).collect();
    let c0 = centered.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if !(c0 > 0.0) {
        return None;
    }
    let rho = |lag: usize| -> f64 {
        let s: f64 = centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum();
        s / n as f64 / c0
    };
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let mut gamma = rho(2 * k) + rho(2 * k + 1);
        if gamma <= 0.0 {
            break;
        }
        if method == EssMethod::InitialMonotone && gamma > prev {
            gamma = prev;
        }
        sum += gamma;
        prev = gamma;
        k += 1;
    }
    let tau = (-1.0 + 2.0 * sum).max(1.0 / n as f64);
    Some(n as f64 / tau)
}

fn choose2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index between two partitions of the same units.
pub fn adjusted_rand_index(p1: &Partition, p2: &Partition) -> Result<f64> {
    if p1.n() != p2.n() {
        return Err(Error::SizeMismatch(format!(
            "partitions have {} and {} units",
            p1.n(),
            p2.n()
        )));
    }
    let mut table: HashMap<(u32, u32), usize> = HashMap::new();
    for (&a, &b) in p1.labels().iter().zip(p2.labels()) {
        *table.entry((a, b)).or_insert(0) += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sa: f64 = p1.sizes().iter().map(|&c| choose2(c)).sum();
    let sb: f64 = p2.sizes().iter().map(|&c| choose2(c)).sum();
    let total = choose2(p1.n());
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sa * sb / total;
    let max = 0.5 * (sa + sb);
    if max == expected {
        return Ok(if p1 == p2 { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// Row-major n×n frequencies with which each pair shares a block.
pub fn coclustering_matrix(draws: &[Partition]) -> Vec<f64> {
    let n = draws.first().map_or(0, |p| p.n());
    let mut acc = vec![0.0; n * n];
    for p in draws {
        let l = p.labels();
        for i in 0..n {
            let row = &mut acc[i * n..(i + 1) * n];
            for j in 0..n {
                if l[i] == l[j] {
                    row[j] += 1.0;
                }
            }
        }
    }
    let k = draws.len().max(1) as f64;
    acc.iter_mut().for_each(|v| *v /= k);
    acc
}

/// Least-squares clustering: the draw closest in squared distance between
/// its co-clustering indicator and the frequency matrix `cocl`.
pub fn least_squares_partition(draws: &[Partition], cocl: &[f64]) -> Option<Partition> {
    let mut best: Option<(f64, &Partition)> = None;
    for p in draws {
        let n = p.n();
        let l = p.labels();
        let mut loss = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let ind = if l[i] == l[j] { 1.0 } else { 0.0 };
                loss += (ind - cocl[i * n + j]).powi(2);
            }
        }
        if best.is_none_or(|(b, _)| loss < b) {
            best = Some((loss, p));
        }
    }
    best.map(|(_, p)| p.clone())
}

/// Normalized histogram of positive integer values on 1..=max.
pub fn histogram(values: &[usize], max: usize) -> Vec<f64> {
    let mut h = vec![0.0; max];
    for &v in values {
        if v >= 1 && v <= max {
            h[v - 1] += 1.0;
        }
    }
    let total = values.len().max(1) as f64;
    h.iter_mut().for_each(|x| *x /= total);
    h
}

/// Total variation distance between two probability vectors (zero-padded).
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Outcome of a goodness-of-fit test.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov distribution tail Q(λ) = 2 Σ (−1)^{j−1} exp(−2 j² λ²).
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..200 {
        let jf = j as f64;
        let t = (-2.0 * jf * jf * lambda * lambda).exp();
        s += if j % 2 == 1 { t } else { -t };
        if t < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> TestResult {
    let (a, b) = (sorted(x), sorted(y));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    TestResult {
        statistic: d,
        p_value: kolmogorov_q((ne + 0.12 + 0.11 / ne) * d),
    }
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(x: &[f64], cdf: F) -> TestResult {
    let a = sorted(x);
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in a.iter().enumerate() {
        let f = cdf(v);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let ne = n.sqrt();
    TestResult {
        statistic: d,
        p_value: kolmogorov_q((ne + 0.12 + 0.11 / ne) * d),
    }
}

/// Chi-square test of homogeneity for two count vectors over the same cells.
/// Cells empty in both samples are dropped.
pub fn chi_square_homogeneity(c1: &[usize], c2: &[usize]) -> TestResult {
    let n = c1.len().max(c2.len());
    let get = |c: &[usize], i: usize| c.get(i).copied().unwrap_or(0) as f64;
    let t1: f64 = c1.iter().sum::<usize>() as f64;
    let t2: f64 = c2.iter().sum::<usize>() as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    for i in 0..n {
        let (a, b) = (get(c1, i), get(c2, i));
        let tot = a + b;
        if tot == 0.0 {
            continue;
        }
        cells += 1;
        let e1 = tot * t1 / (t1 + t2);
        let e2 = tot * t2 / (t1 + t2);
        stat += (a - e1).powi(2) / e1 + (b - e2).powi(2) / e2;
    }
    let df = cells.saturating_sub(1).max(1) as f64;
    TestResult {
        statistic: stat,
        p_value: 1.0 - gamma_p(df / 2.0, stat / 2.0),
    }
}

//! Exchangeable random partitions: EPPFs of the Dirichlet and Stirling-gamma
//! processes, urn simulation, exact cluster-count laws and their limits.

use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::StirlingGammaParams;
use crate::error::{Error, Result};
use crate::quadrature::{log_integral, QuadratureConfig};
use crate::sampler::StirlingGammaSampler;
use crate::special::{ln_gamma, ln_rising, psi1, StirlingTable};

/// A partition of n units in canonical order-of-appearance form.
///
/// Labels are stored 0-based; the text form is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl Partition {
    /// Canonicalizes arbitrary labels so that block j first appears before block j+1.
    pub fn from_labels<T: Copy + Eq + Hash>(labels: &[T]) -> Result<Partition> {
        if labels.is_empty() {
            return Err(Error::Domain("a partition needs at least one unit".into()));
        }
        let mut map = HashMap::new();
        let mut out = Vec::with_capacity(labels.len());
        let mut sizes = Vec::new();
        for &l in labels {
            let next = map.len() as u32;
            let c = *map.entry(l).or_insert(next);
            if c as usize == sizes.len() {
                sizes.push(0);
            }
            sizes[c as usize] += 1;
            out.push(c);
        }
        Ok(Partition { labels: out, sizes })
    }

    /// Trusts that `labels` is already canonical.
    pub(crate) fn from_canonical(labels: Vec<u32>, sizes: Vec<usize>) -> Partition {
        debug_assert_eq!(sizes.iter().sum::<usize>(), labels.len());
        Partition { labels, sizes }
    }

    pub fn one_block(n: usize) -> Partition {
        Partition {
            labels: vec![0; n],
            sizes: vec![n],
        }
    }

    pub fn singletons(n: usize) -> Partition {
        Partition {
            labels: (0..n as u32).collect(),
            sizes: vec![1; n],
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// 0-based block labels.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Comma-separated 1-based labels.
    pub fn to_csv_line(&self) -> String {
        let v: Vec<String> = self.labels.iter().map(|l| (l + 1).to_string()).collect();
        v.join(",")
    }

    pub fn parse_csv_line(line: &str) -> Result<Partition> {
        let labels = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("bad label {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::from_labels(&labels)
    }

    /// All set partitions of n units (Bell-number many).
    pub fn enumerate(n: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let mut labels = vec![0u32; n];
        let mut maxes = vec![0u32; n];
        loop {
            let k = *maxes.last().unwrap() as usize + 1;
            let mut sizes = vec![0usize; k];
            for &l in &labels {
                sizes[l as usize] += 1;
            }
            out.push(Partition {
                labels: labels.clone(),
                sizes,
            });
            // Next restricted growth string.
            let mut i = n - 1;
            loop {
                if i == 0 {
                    return out;
                }
                if labels[i] <= maxes[i - 1] {
                    labels[i] += 1;
                    maxes[i] = maxes[i - 1].max(labels[i]);
                    for j in i + 1..n {
                        labels[j] = 0;
                        maxes[j] = maxes[i];
                    }
                    break;
                }
                i -= 1;
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "α must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}

/// log of the Dirichlet-process EPPF: k log α − log (α)_n + Σ log Γ(n_j).
pub fn dp_log_eppf(alpha: f64, part: &Partition) -> Result<f64> {
    check_alpha(alpha)?;
    let k = part.k() as f64;
    let s: f64 = part.sizes().iter().map(|&nj| ln_gamma(nj as f64)).sum();
    Ok(k * alpha.ln() - ln_rising(alpha, part.n() as u64) + s)
}

/// log ∫ α^{a+k−1} / ({(α)_m}^b (α)_n) dα by quadrature.
pub fn v_coefficient(p: &StirlingGammaParams, n: u64, k: u64) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    let (a, b, m) = (p.a(), p.b(), p.m());
    let c = a + k as f64 - b - 2.0;
    log_integral(
        move |x| c * x.ln() - b * ln_rising(x + 1.0, m - 1) - ln_rising(x + 1.0, n - 1),
        QuadratureConfig::default(),
    )
}

/// log of the Stirling-gamma process EPPF.
pub fn sgp_log_eppf(p: &StirlingGammaParams, part: &Partition) -> Result<f64> {
    let s: f64 = part.sizes().iter().map(|&nj| ln_gamma(nj as f64)).sum();
    let v = v_coefficient(p, part.n() as u64, part.k() as u64)?;
    Ok(v - p.log_norm_const()? + s)
}

/// Exact law of the number of clusters on {1, ..., n}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterCountPmf {
    n: usize,
    probabilities: Vec<f64>,
}

impl ClusterCountPmf {
    /// Validates nonnegativity and a total within 1e-8 of one.
    pub fn new(probabilities: Vec<f64>) -> Result<ClusterCountPmf> {
        if probabilities.is_empty() {
            return Err(Error::Domain("empty pmf".into()));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Numerical(
                "pmf has a negative or non-finite entry".into(),
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Numerical(format!("pmf sums to {total}")));
        }
        Ok(ClusterCountPmf {
            n: probabilities.len(),
            probabilities,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry k − 1 holds pr(K_n = k).
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn pmf(&self, k: usize) -> f64 {
        if k == 0 || k > self.n {
            0.0
        } else {
            self.probabilities[k - 1]
        }
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) as f64 - mu).powi(2) * p)
            .sum()
    }

    /// Smallest most probable k.
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = i;
            }
        }
        best + 1
    }

    /// Total variation distance to a law on {1, 2, ...}; mass beyond n counts fully.
    pub fn tv_distance_to<F: Fn(usize) -> f64>(&self, q: F) -> f64 {
        let mut diff = 0.0;
        let mut q_inside = 0.0;
        for k in 1..=self.n {
            let qk = q(k);
            q_inside += qk;
            diff += (self.pmf(k) - qk).abs();
        }
        0.5 * (diff + (1.0 - q_inside).max(0.0))
    }

    /// Two-column CSV `k,probability` with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,probability\n");
        for (i, p) in self.probabilities.iter().enumerate() {
            s.push_str(&format!("{},{}\n", i + 1, p));
        }
        s
    }
}

/// Cluster-count law under a Dirichlet process with fixed α.
pub fn kn_pmf_dp(alpha: f64, n: usize) -> Result<ClusterCountPmf> {
    kn_pmf_dp_with(StirlingTable::global(), alpha, n)
}

pub fn kn_pmf_dp_with(table: &StirlingTable, alpha: f64, n: usize) -> Result<ClusterCountPmf> {
    check_alpha(alpha)?;
    let row = table.row(n)?;
    let la = alpha.ln();
    let lr = ln_rising(alpha, n as u64);
    let probs = row
        .iter()
        .enumerate()
        .map(|(i, &ls)| ((i + 1) as f64 * la - lr + ls).exp())
        .collect();
    ClusterCountPmf::new(probs)
}

/// Cluster-count law under the Stirling-gamma process.
///
/// Entries far past the mode whose log probability falls 50 units below the
/// maximum are not integrated and are set to zero.
pub fn kn_pmf_sgp(p: &StirlingGammaParams, n: usize) -> Result<ClusterCountPmf> {
    kn_pmf_sgp_with(StirlingTable::global(), p, n)
}

pub fn kn_pmf_sgp_with(
    table: &StirlingTable,
    p: &StirlingGammaParams,
    n: usize,
) -> Result<ClusterCountPmf> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let row = table.row(n)?;
    let ln_s = p.log_norm_const()?;
    let mut logs = vec![f64::NEG_INFINITY; n];
    let mut best = f64::NEG_INFINITY;
    let mut below = 0;
    for k in 1..=n {
        let l = v_coefficient(p, n as u64, k as u64)? - ln_s + row[k - 1];
        logs[k - 1] = l;
        if l > best {
            best = l;
            below = 0;
        } else if l < best - 50.0 {
            below += 1;
            if below >= 5 {
                break;
            }
        }
    }
    ClusterCountPmf::new(logs.into_iter().map(f64::exp).collect())
}

/// D_{a,b,m} = E[α² (ψ′(α) − ψ′(α + m))].
pub fn d_constant(p: &StirlingGammaParams) -> Result<f64> {
    let m = p.m();
    Ok(
        p.log_expectation(move |x| 2.0 * x.ln() + trigamma_gap(x, m).ln())?
            .exp(),
    )
}

/// ψ′(α) − ψ′(α + m) = Σ_{i<m} 1/(α+i)².
pub(crate) fn trigamma_gap(alpha: f64, m: u64) -> f64 {
    if m <= 200 {
        (0..m).rev().map(|i| (alpha + i as f64).powi(-2)).sum()
    } else {
        psi1(alpha) - psi1(alpha + m as f64)
    }
}

/// Chinese-restaurant sequential seating with precision α.
pub fn sample_partition_crp<R: Rng + ?Sized>(
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> Result<Partition> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let mut labels = Vec::with_capacity(n);
    let mut sizes: Vec<usize> = Vec::new();
    for i in 0..n {
        let u = rng.random::<f64>() * (alpha + i as f64);
        let mut acc = 0.0;
        let mut chosen = sizes.len();
        for (j, &nj) in sizes.iter().enumerate() {
            acc += nj as f64;
            if u < acc {
                chosen = j;
                break;
            }
        }
        if chosen == sizes.len() {
            sizes.push(0);
        }
        sizes[chosen] += 1;
        labels.push(chosen as u32);
    }
    Ok(Partition::from_canonical(labels, sizes))
}

/// Number of blocks of a CRP partition, drawn without building the partition.
pub fn sample_cluster_count_crp<R: Rng + ?Sized>(
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> Result<usize> {
    check_alpha(alpha)?;
    Ok((0..n)
        .filter(|&i| rng.random::<f64>() * (alpha + i as f64) < alpha)
        .count())
}

/// A partition from the Stirling-gamma process: α ~ Sg(a, b, m), then the CRP.
pub fn sample_partition_sgp<R: Rng + ?Sized>(
    p: &StirlingGammaParams,
    n: usize,
    rng: &mut R,
) -> Result<Partition> {
    let alpha = StirlingGammaSampler::new(*p)?.sample(rng)?;
    sample_partition_crp(alpha, n, rng)
}

/// pmf at k of 1 + NegBin(a − b, b/(b+1)).
pub fn negbin_limit_pmf(a: f64, b: f64, k: usize) -> Result<f64> {
    if !(b > 0.0) || !(a > b) {
        return Err(Error::Domain(format!(
            "need a > b > 0, got a = {a}, b = {b}"
        )));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let r = a - b;
    let j = (k - 1) as f64;
    Ok(
        (ln_gamma(r + j) - ln_gamma(j + 1.0) - ln_gamma(r) - j * b.ln_1p()
            + r * (b / (b + 1.0)).ln())
        .exp(),
    )
}

/// pmf at k of 1 + Poisson(λ).
pub fn poisson_limit_pmf(lambda: f64, k: usize) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("need λ > 0, got {lambda}")));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let j = (k - 1) as f64;
    Ok((-lambda + j * lambda.ln() - ln_gamma(j + 1.0)).exp())
}

//! Conjugate updates of a Stirling-gamma prior on the precision given
//! observed partitions, and prior elicitation from an expected cluster count.

use serde::{Deserialize, Serialize};

use crate::distribution::StirlingGammaParams;
use crate::error::{Error, Result};

/// Cluster counts of N partitions of the same n units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionObservations {
    n: u64,
    cluster_counts: Vec<u64>,
}

impl PartitionObservations {
    pub fn new(n: u64, cluster_counts: Vec<u64>) -> Result<Self> {
        if cluster_counts.is_empty() {
            return Err(Error::Domain(
                "at least one observed partition is required".into(),
            ));
        }
        if let Some(&k) = cluster_counts.iter().find(|&&k| k == 0 || k > n) {
            return Err(Error::Domain(format!(
                "cluster count {k} is outside 1..{n}"
            )));
        }
        Ok(PartitionObservations { n, cluster_counts })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn cluster_counts(&self) -> &[u64] {
        &self.cluster_counts
    }

    pub fn len(&self) -> usize {
        self.cluster_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cluster_counts.is_empty()
    }

    pub fn mean_clusters(&self) -> f64 {
        self.cluster_counts.iter().sum::<u64>() as f64 / self.len() as f64
    }
}

fn check_reference(prior: &StirlingGammaParams, n: u64) -> Result<()> {
    if prior.m() != n {
        return Err(Error::Conjugacy { m: prior.m(), n });
    }
    Ok(())
}

/// Posterior Sg(a + k, b + 1, n) after one partition with k blocks.
pub fn posterior_single(
    prior: &StirlingGammaParams,
    k: u64,
    n: u64,
) -> Result<StirlingGammaParams> {
    check_reference(prior, n)?;
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "cluster count {k} is outside 1..{n}"
        )));
    }
    StirlingGammaParams::new(prior.a() + k as f64, prior.b() + 1.0, n)
}

/// Posterior Sg(a + Σ k_s, b + N, n) after N partitions sharing the precision.
pub fn posterior_pooled(
    prior: &StirlingGammaParams,
    obs: &PartitionObservations,
) -> Result<StirlingGammaParams> {
    check_reference(prior, obs.n)?;
    let total: u64 = obs.cluster_counts.iter().sum();
    StirlingGammaParams::new(
        prior.a() + total as f64,
        prior.b() + obs.len() as f64,
        obs.n,
    )
}

/// Posterior mean of α(ψ(α+n) − ψ(α)): (b/(b+N)) a/b + (N/(b+N)) k̄.
pub fn posterior_mean_expected_clusters(
    prior: &StirlingGammaParams,
    obs: &PartitionObservations,
) -> Result<f64> {
    check_reference(prior, obs.n)?;
    let b = prior.b();
    let nn = obs.len() as f64;
    Ok(b / (b + nn) * prior.location() + nn / (b + nn) * obs.mean_clusters())
}

/// Sg(E b, b, n), the prior with E(K_n) = E at the reference size n.
pub fn prior_elicit(
    expected_clusters: f64,
    precision_b: f64,
    n: u64,
) -> Result<StirlingGammaParams> {
    if !(expected_clusters > 1.0 && expected_clusters < n as f64) {
        return Err(Error::Domain(format!(
            "expected number of clusters must lie in (1, {n}), got {expected_clusters}"
        )));
    }
    if !(precision_b > 0.0) {
        return Err(Error::Domain(format!(
            "b must be positive, got {precision_b}"
        )));
    }
    StirlingGammaParams::new(expected_clusters * precision_b, precision_b, n)
}

//! Collapsed Gibbs sampler for Beta-Bernoulli stochastic block models on
//! several undirected networks over the same nodes, with one partition per
//! network and a fixed, independent or pooled precision.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conjugacy::{posterior_pooled, posterior_single, PartitionObservations};
use crate::diagnostics::{
    coclustering_matrix, effective_sample_size, histogram, least_squares_partition,
};
use crate::distribution::StirlingGammaParams;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::sampler::StirlingGammaSampler;
use crate::special::ln_factorial;

pub use crate::diagnostics::adjusted_rand_index;

/// N symmetric binary adjacency matrices with zero diagonal over n nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkData {
    n: usize,
    adjacency: Vec<Vec<u8>>,
    neighbors: Vec<Vec<Vec<u32>>>,
}

impl NetworkData {
    /// Each matrix is row-major n×n with entries 0 or 1.
    pub fn new(n: usize, adjacency: Vec<Vec<u8>>) -> Result<Self> {
        if n == 0 || adjacency.is_empty() {
            return Err(Error::Domain(
                "need at least one network with one node".into(),
            ));
        }
        for (s, a) in adjacency.iter().enumerate() {
            if a.len() != n * n {
                return Err(Error::SizeMismatch(format!(
                    "network {} has {} entries, expected {}",
                    s + 1,
                    a.len(),
                    n * n
                )));
            }
            for i in 0..n {
                if a[i * n + i] != 0 {
                    return Err(Error::Domain(format!(
                        "network {}: nonzero diagonal at node {}",
                        s + 1,
                        i + 1
                    )));
                }
                for j in 0..n {
                    let v = a[i * n + j];
                    if v > 1 {
                        return Err(Error::Domain(format!(
                            "network {}: entry {v} is not binary",
                            s + 1
                        )));
                    }
                    if v != a[j * n + i] {
                        return Err(Error::Domain(format!(
                            "network {}: asymmetric entry ({}, {})",
                            s + 1,
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        let neighbors = adjacency
            .iter()
            .map(|a| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .filter(|&j| a[i * n + j] == 1)
                            .map(|j| j as u32)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(NetworkData {
            n,
            adjacency,
            neighbors,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_networks(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge(&self, s: usize, i: usize, j: usize) -> bool {
        self.adjacency[s][i * self.n + j] == 1
    }

    pub fn adjacency(&self, s: usize) -> &[u8] {
        &self.adjacency[s]
    }

    pub fn neighbors(&self, s: usize, i: usize) -> &[u32] {
        &self.neighbors[s][i]
    }
}

/// Log marginal probability of a block with `edges` ones among `pairs`
/// node pairs under a uniform Beta prior on the edge probability.
pub fn log_collapsed_block_likelihood(edges: u64, pairs: u64) -> Result<f64> {
    if edges > pairs {
        return Err(Error::Domain(format!("{edges} edges exceed {pairs} pairs")));
    }
    Ok(ln_factorial(edges) + ln_factorial(pairs - edges) - ln_factorial(pairs + 1))
}

/// Same as `log_collapsed_block_likelihood` using a table of ln k!.
struct BlockLik {
    ln_fact: Vec<f64>,
}

impl BlockLik {
    fn new(n: usize) -> Self {
        let max = n * n / 2 + 2;
        let mut ln_fact = Vec::with_capacity(max + 1);
        ln_fact.push(0.0);
        for k in 1..=max {
            ln_fact.push(ln_fact[k - 1] + (k as f64).ln());
        }
        BlockLik { ln_fact }
    }

    #[inline]
    fn eval(&self, e: u64, q: u64) -> f64 {
        self.ln_fact[e as usize] + self.ln_fact[(q - e) as usize] - self.ln_fact[q as usize + 1]
    }
}

fn pairs(nh: u64, ng: u64, same: bool) -> u64 {
    if same {
        nh * nh.saturating_sub(1) / 2
    } else {
        nh * ng
    }
}

/// Partition and block edge counts for one network.
#[derive(Clone, Debug)]
struct NetworkState {
    labels: Vec<u32>,
    sizes: Vec<u64>,
    /// Symmetric K×K edge counts; the diagonal counts within-block edges.
    edges: Vec<Vec<u64>>,
}

impl NetworkState {
    fn from_partition(data: &NetworkData, s: usize, part: &Partition) -> Self {
        let k = part.k();
        let mut edges = vec![vec![0u64; k]; k];
        let labels = part.labels().to_vec();
        for i in 0..data.n {
            for &j in data.neighbors(s, i) {
                let j = j as usize;
                if j > i {
                    let (a, b) = (labels[i] as usize, labels[j] as usize);
                    edges[a][b] += 1;
                    if a != b {
                        edges[b][a] += 1;
                    }
                }
            }
        }
        NetworkState {
            labels,
            sizes: part.sizes().iter().map(|&c| c as u64).collect(),
            edges,
        }
    }

    fn k(&self) -> usize {
        self.sizes.len()
    }

    fn partition(&self) -> Partition {
        Partition::from_canonical(
            self.labels.clone(),
            self.sizes.iter().map(|&c| c as usize).collect(),
        )
    }

    fn log_likelihood(&self, lik: &BlockLik) -> f64 {
        let k = self.k();
        let mut total = 0.0;
        for h in 0..k {
            for g in h..k {
                total += lik.eval(
                    self.edges[h][g],
                    pairs(self.sizes[h], self.sizes[g], h == g),
                );
            }
        }
        total
    }

    fn remove_cluster(&mut self, c: usize) {
        let last = self.k() - 1;
        self.sizes.swap_remove(c);
        self.edges.swap_remove(c);
        for row in self.edges.iter_mut() {
            row.swap_remove(c);
        }
        if c != last {
            for l in self.labels.iter_mut() {
                if *l as usize == last {
                    *l = c as u32;
                }
            }
        }
    }

    fn relabel(&mut self) {
        let k = self.k();
        let mut map = vec![u32::MAX; k];
        let mut next = 0u32;
        for l in self.labels.iter_mut() {
            if map[*l as usize] == u32::MAX {
                map[*l as usize] = next;
                next += 1;
            }
            *l = map[*l as usize];
        }
        let mut inv = vec![0usize; k];
        for (old, &new) in map.iter().enumerate() {
            inv[new as usize] = old;
        }
        self.sizes = inv.iter().map(|&o| self.sizes[o]).collect();
        self.edges = inv
            .iter()
            .map(|&o| inv.iter().map(|&p| self.edges[o][p]).collect())
            .collect();
    }
}

/// Prior on the per-network precisions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SbmPrior {
    /// The same known α for every network.
    Fixed { alpha: f64 },
    /// α_s ~ Sg(a, b, n) separately for each network.
    Independent { params: StirlingGammaParams },
    /// One α ~ Sg(a, b, n) shared by all networks.
    Pooled { params: StirlingGammaParams },
}

impl SbmPrior {
    fn check(&self, n: usize) -> Result<()> {
        match self {
            SbmPrior::Fixed { alpha } => {
                if !(*alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::Parameter(format!(
                        "fixed α must be positive, got {alpha}"
                    )));
                }
            }
            SbmPrior::Independent { params } | SbmPrior::Pooled { params } => {
                if params.m() != n as u64 {
                    return Err(Error::Conjugacy {
                        m: params.m(),
                        n: n as u64,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Partitions, precisions and block counts for all networks.
#[derive(Clone, Debug)]
pub struct MultiNetworkState {
    networks: Vec<NetworkState>,
    alphas: Vec<f64>,
    lik: std::sync::Arc<BlockLik>,
}

impl std::fmt::Debug for BlockLik {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BlockLik({})", self.ln_fact.len())
    }
}

impl MultiNetworkState {
    pub fn new(data: &NetworkData, partitions: &[Partition], alphas: Vec<f64>) -> Result<Self> {
        let nn = data.num_networks();
        if partitions.len() != nn || alphas.len() != nn {
            return Err(Error::SizeMismatch(format!(
                "{nn} networks but {} partitions and {} precisions",
                partitions.len(),
                alphas.len()
            )));
        }
        if let Some(p) = partitions.iter().find(|p| p.n() != data.n) {
            return Err(Error::SizeMismatch(format!(
                "partition over {} units for {} nodes",
                p.n(),
                data.n
            )));
        }
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0)) {
            return Err(Error::Domain(format!("α must be positive, got {a}")));
        }
        Ok(MultiNetworkState {
            networks: partitions
                .iter()
                .enumerate()
                .map(|(s, p)| NetworkState::from_partition(data, s, p))
                .collect(),
            alphas,
            lik: std::sync::Arc::new(BlockLik::new(data.n)),
        })
    }

    /// Every network starts with all nodes in one block.
    pub fn one_block(data: &NetworkData, alphas: Vec<f64>) -> Result<Self> {
        let parts = vec![Partition::one_block(data.n); data.num_networks()];
        Self::new(data, &parts, alphas)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn num_clusters(&self, s: usize) -> usize {
        self.networks[s].k()
    }

    pub fn partition(&self, s: usize) -> Partition {
        self.networks[s].partition()
    }

    /// Sum of block log-marginals of network s from the tracked counts.
    pub fn log_likelihood(&self, s: usize) -> f64 {
        self.networks[s].log_likelihood(&self.lik)
    }

    /// Compares block counts with a recomputation from scratch.
    pub fn check_consistency(&self, data: &NetworkData) -> Result<()> {
        for (s, net) in self.networks.iter().enumerate() {
            let fresh = NetworkState::from_partition(data, s, &net.partition());
            if fresh.sizes != net.sizes || fresh.edges != net.edges {
                return Err(Error::Numerical(format!(
                    "block counts of network {} drifted",
                    s + 1
                )));
            }
        }
        Ok(())
    }
}

/// Log marginal likelihood of network s under a partition, from scratch.
pub fn log_marginal_likelihood(data: &NetworkData, s: usize, part: &Partition) -> Result<f64> {
    if part.n() != data.n {
        return Err(Error::SizeMismatch(format!(
            "partition over {} units for {} nodes",
            part.n(),
            data.n
        )));
    }
    let net = NetworkState::from_partition(data, s, part);
    let mut total = 0.0;
    for h in 0..net.k() {
        for g in h..net.k() {
            total += log_collapsed_block_likelihood(
                net.edges[h][g],
                pairs(net.sizes[h], net.sizes[g], h == g),
            )?;
        }
    }
    Ok(total)
}

/// One sequential sweep over the nodes of network s.
pub fn gibbs_sweep_network<R: Rng + ?Sized>(
    state: &mut MultiNetworkState,
    s: usize,
    data: &NetworkData,
    rng: &mut R,
) {
    let lik = state.lik.clone();
    let ln_alpha = state.alphas[s].ln();
    let net = &mut state.networks[s];
    let mut d: Vec<u64> = Vec::new();
    let mut w: Vec<f64> = Vec::new();
    for i in 0..data.n {
        let c = net.labels[i] as usize;
        d.clear();
        d.resize(net.k(), 0);
        for &j in data.neighbors(s, i) {
            d[net.labels[j as usize] as usize] += 1;
        }
        for g in 0..net.k() {
            net.edges[c][g] -= d[g];
            if g != c {
                net.edges[g][c] -= d[g];
            }
        }
        net.sizes[c] -= 1;
        if net.sizes[c] == 0 {
            // d[c] is zero here: i was alone in c.
            net.remove_cluster(c);
            d.swap_remove(c);
        }
        let k = net.k();
        w.clear();
        for h in 0..k {
            let nh = net.sizes[h];
            let mut delta = 0.0;
            for g in 0..k {
                let ng = net.sizes[g];
                let e = net.edges[h][g];
                if g == h {
                    let q = pairs(nh, nh, true);
                    delta += lik.eval(e + d[h], q + nh) - lik.eval(e, q);
                } else {
                    let q = nh * ng;
                    delta += lik.eval(e + d[g], q + ng) - lik.eval(e, q);
                }
            }
            w.push((nh as f64).ln() + delta);
        }
        let mut delta_new = 0.0;
        for g in 0..k {
            delta_new += lik.eval(d[g], net.sizes[g]);
        }
        w.push(ln_alpha + delta_new);
        let max = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in w.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut h = k;
        for (j, v) in w.iter().enumerate() {
            acc += v;
            if u < acc {
                h = j;
                break;
            }
        }
        if h >= k {
            h = k;
            net.sizes.push(0);
            for row in net.edges.iter_mut() {
                row.push(0);
            }
            net.edges.push(vec![0; k + 1]);
            d.push(0);
        }
        for g in 0..net.k() {
            net.edges[h][g] += d[g];
            if g != h {
                net.edges[g][h] += d[g];
            }
        }
        net.sizes[h] += 1;
        net.labels[i] = h as u32;
    }
    net.relabel();
}

/// Updates the precisions given the current partitions.
pub fn gibbs_step_alphas<R: Rng + ?Sized>(
    state: &mut MultiNetworkState,
    prior: &SbmPrior,
    rng: &mut R,
) -> Result<()> {
    let n = state.networks[0].labels.len() as u64;
    match prior {
        SbmPrior::Fixed { .. } => Ok(()),
        SbmPrior::Independent { params } => {
            for (s, net) in state.networks.iter().enumerate() {
                let post = posterior_single(params, net.k() as u64, n)?;
                state.alphas[s] = StirlingGammaSampler::new(post)?.sample(rng)?;
            }
            Ok(())
        }
        SbmPrior::Pooled { params } => gibbs_step_alpha_pooled(state, params, rng),
    }
}

/// Draws the shared α from Sg(a + Σ k_s, b + N, n).
pub fn gibbs_step_alpha_pooled<R: Rng + ?Sized>(
    state: &mut MultiNetworkState,
    prior: &StirlingGammaParams,
    rng: &mut R,
) -> Result<()> {
    let n = state.networks[0].labels.len() as u64;
    let ks = state.networks.iter().map(|net| net.k() as u64).collect();
    let post = posterior_pooled(prior, &PartitionObservations::new(n, ks)?)?;
    let alpha = StirlingGammaSampler::new(post)?.sample(rng)?;
    state.alphas.iter_mut().for_each(|a| *a = alpha);
    Ok(())
}

/// Chain length and bookkeeping options.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SbmConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub check_every: usize,
    pub store_partitions: bool,
    pub coclustering: bool,
}

impl Default for SbmConfig {
    fn default() -> Self {
        SbmConfig {
            iterations: 10_000,
            burn_in: 2_000,
            thin: 1,
            check_every: 500,
            store_partitions: false,
            coclustering: true,
        }
    }
}

/// Post-burn-in output of one multi-network chain; outer index is the network.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SbmTrace {
    pub iterations: Vec<usize>,
    pub num_clusters: Vec<Vec<usize>>,
    pub alpha: Vec<Vec<f64>>,
    pub partitions: Option<Vec<Vec<Partition>>>,
    /// Row-major n×n co-clustering frequencies per network.
    pub coclustering: Option<Vec<Vec<f64>>>,
    /// Posterior mean ARI against the true partition, per network.
    pub mean_ari: Option<Vec<f64>>,
    /// Least-squares point estimate of each network's partition.
    pub point_estimates: Option<Vec<Partition>>,
    /// ARI of each point estimate against the true partition.
    pub point_estimate_ari: Option<Vec<f64>>,
}

impl SbmTrace {
    pub fn cluster_count_histogram(&self, s: usize, n: usize) -> Vec<f64> {
        histogram(&self.num_clusters[s], n)
    }

    /// Posterior mean ARI averaged over networks.
    pub fn overall_mean_ari(&self) -> Option<f64> {
        self.mean_ari
            .as_ref()
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Point-estimate ARI averaged over networks.
    pub fn overall_point_estimate_ari(&self) -> Option<f64> {
        self.point_estimate_ari
            .as_ref()
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Effective sample size of the α trace of network s.
    pub fn alpha_ess(&self, s: usize) -> Option<f64> {
        effective_sample_size(&self.alpha[s])
    }
}

/// Full sweeps over every network, then the precision step, per iteration.
pub fn run_multinetwork_chain<R: Rng + ?Sized>(
    data: &NetworkData,
    prior: &SbmPrior,
    config: &SbmConfig,
    truth: Option<&Partition>,
    rng: &mut R,
) -> Result<SbmTrace> {
    if config.iterations <= config.burn_in {
        return Err(Error::Parameter(format!(
            "iterations ({}) must exceed burn-in ({})",
            config.iterations, config.burn_in
        )));
    }
    let n = data.n;
    let nn = data.num_networks();
    prior.check(n)?;
    if let Some(t) = truth {
        if t.n() != n {
            return Err(Error::SizeMismatch(format!(
                "true partition has {} units for {n} nodes",
                t.n()
            )));
        }
    }
    let alphas = match prior {
        SbmPrior::Fixed { alpha } => vec![*alpha; nn],
        SbmPrior::Independent { params } => {
            let smp = StirlingGammaSampler::new(*params)?;
            (0..nn).map(|_| smp.sample(rng)).collect::<Result<_>>()?
        }
        SbmPrior::Pooled { params } => vec![StirlingGammaSampler::new(*params)?.sample(rng)?; nn],
    };
    // Single-site moves split merged blocks slowly, so start from singletons.
    let start = vec![Partition::singletons(n); nn];
    let mut state = MultiNetworkState::new(data, &start, alphas)?;
    let thin = config.thin.max(1);
    let keep_draws = config.store_partitions || config.coclustering || truth.is_some();
    let mut trace = SbmTrace {
        iterations: Vec::new(),
        num_clusters: vec![Vec::new(); nn],
        alpha: vec![Vec::new(); nn],
        partitions: None,
        coclustering: None,
        mean_ari: None,
        point_estimates: None,
        point_estimate_ari: None,
    };
    let mut draws: Vec<Vec<Partition>> = vec![Vec::new(); nn];
    let mut ari_sum = vec![0.0; nn];
    for it in 1..=config.iterations {
        for s in 0..nn {
            gibbs_sweep_network(&mut state, s, data, rng);
        }
        gibbs_step_alphas(&mut state, prior, rng)?;
        if config.check_every > 0 && it % config.check_every == 0 {
            state.check_consistency(data)?;
        }
        if it > config.burn_in && (it - config.burn_in).is_multiple_of(thin) {
            trace.iterations.push(it);
            for s in 0..nn {
                trace.num_clusters[s].push(state.num_clusters(s));
                trace.alpha[s].push(state.alphas[s]);
                if keep_draws {
                    let p = state.partition(s);
                    if let Some(t) = truth {
                        ari_sum[s] += adjusted_rand_index(&p, t)?;
                    }
                    draws[s].push(p);
                }
            }
        }
    }
    if keep_draws {
        let k = trace.iterations.len() as f64;
        let cocl: Vec<Vec<f64>> = draws.iter().map(|d| coclustering_matrix(d)).collect();
        let points: Vec<Partition> = draws
            .iter()
            .zip(&cocl)
            .map(|(d, c)| least_squares_partition(d, c).expect("at least one retained draw"))
            .collect();
        if let Some(t) = truth {
            trace.mean_ari = Some(ari_sum.iter().map(|v| v / k).collect());
            trace.point_estimate_ari = Some(
                points
                    .iter()
                    .map(|p| adjusted_rand_index(p, t))
                    .collect::<Result<_>>()?,
            );
        }
        trace.point_estimates = Some(points);
        if config.coclustering {
            trace.coclustering = Some(cocl);
        }
        if config.store_partitions {
            trace.partitions = Some(draws);
        }
    }
    Ok(trace)
}

/// Runs independent chains in parallel with generators derived from (seed, chain).
pub fn run_multinetwork_chains(
    data: &NetworkData,
    prior: &SbmPrior,
    config: &SbmConfig,
    truth: Option<&Partition>,
    seed: u64,
    chains: usize,
) -> Result<Vec<SbmTrace>> {
    (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            run_multinetwork_chain(data, prior, config, truth, &mut rng)
        })
        .collect()
}

/// Within-block edge probabilities of the six simulated networks.
pub const SIM_P_IN: [f64; 6] = [0.95, 0.90, 0.85, 0.80, 0.75, 0.70];
/// Between-block edge probabilities of the six simulated networks.
pub const SIM_P_OUT: [f64; 6] = [0.05, 0.10, 0.10, 0.15, 0.15, 0.30];

/// Six networks sharing one partition into (at most) six blocks drawn with
/// Dirichlet(10, …, 10) assignment probabilities.
pub fn simulate_networks<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<(NetworkData, Partition)> {
    if n < 12 {
        return Err(Error::Domain(format!("need at least 12 nodes, got {n}")));
    }
    let g = Gamma::new(10.0, 1.0).unwrap();
    let w: Vec<f64> = (0..6).map(|_| g.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    let labels: Vec<u32> = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            for (h, v) in w.iter().enumerate() {
                acc += v;
                if u < acc {
                    return h as u32;
                }
            }
            5
        })
        .collect();
    let truth = Partition::from_labels(&labels)?;
    let adjacency = SIM_P_IN
        .iter()
        .zip(SIM_P_OUT)
        .map(|(&pin, pout)| {
            let mut a = vec![0u8; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let p = if labels[i] == labels[j] { pin } else { pout };
                    let e = (rng.random::<f64>() < p) as u8;
                    a[i * n + j] = e;
                    a[j * n + i] = e;
                }
            }
            a
        })
        .collect();
    Ok((NetworkData::new(n, adjacency)?, truth))
}

//! Marginal Gibbs sampler for a Dirichlet-process mixture of multivariate
//! Gaussians with a conjugate normal-inverse-Wishart base measure and a fixed
//! or Stirling-gamma distributed precision.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conjugacy::posterior_single;
use crate::distribution::StirlingGammaParams;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::sampler::StirlingGammaSampler;
use crate::special::ln_gamma;

/// Lower Cholesky factor of a d×d row-major SPD matrix.
fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Normal-inverse-Wishart hyperparameters: μ | Σ ~ N(mean0, Σ/κ0), Σ ~ IW(ν0, scale0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NiwParams {
    mean0: Vec<f64>,
    kappa0: f64,
    nu0: f64,
    scale0: Vec<f64>,
}

impl NiwParams {
    pub fn new(mean0: Vec<f64>, kappa0: f64, nu0: f64, scale0: Vec<f64>) -> Result<Self> {
        let d = mean0.len();
        if d == 0 {
            return Err(Error::Parameter("dimension must be positive".into()));
        }
        if scale0.len() != d * d {
            return Err(Error::SizeMismatch(format!(
                "scale matrix has {} entries, expected {}",
                scale0.len(),
                d * d
            )));
        }
        if !(kappa0 > 0.0) {
            return Err(Error::Parameter(format!(
                "kappa0 must be positive, got {kappa0}"
            )));
        }
        if !(nu0 > d as f64 - 1.0) {
            return Err(Error::Parameter(format!(
                "nu0 must exceed dimension − 1 = {}, got {nu0}",
                d - 1
            )));
        }
        for i in 0..d {
            for j in 0..i {
                if (scale0[i * d + j] - scale0[j * d + i]).abs()
                    > 1e-12 * scale0[i * d + i].abs().max(1.0)
                {
                    return Err(Error::Parameter("scale matrix is not symmetric".into()));
                }
            }
        }
        if cholesky(&scale0, d).is_none() {
            return Err(Error::Parameter(
                "scale matrix is not positive definite".into(),
            ));
        }
        Ok(NiwParams {
            mean0,
            kappa0,
            nu0,
            scale0,
        })
    }

    /// Zero mean, identity scale, κ0 = 0.01, ν0 = d + 2.
    pub fn default_for_dim(d: usize) -> Self {
        let mut scale = vec![0.0; d * d];
        for i in 0..d {
            scale[i * d + i] = 1.0;
        }
        NiwParams::new(vec![0.0; d], 0.01, d as f64 + 2.0, scale).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.mean0.len()
    }
    pub fn mean0(&self) -> &[f64] {
        &self.mean0
    }
    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }
    pub fn nu0(&self) -> f64 {
        self.nu0
    }
    pub fn scale0(&self) -> &[f64] {
        &self.scale0
    }
}

/// n points in d dimensions, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::SizeMismatch(format!(
                "{} values do not form rows of dimension {dim}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("data contain non-finite values".into()));
        }
        Ok(Dataset { dim, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same points in a different order: row i of the result is row `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Dataset {
        let mut v = Vec::with_capacity(self.values.len());
        for &i in order {
            v.extend_from_slice(self.point(i));
        }
        Dataset {
            dim: self.dim,
            values: v,
        }
    }
}

/// Count, sum and sum of outer products of a cluster's members.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterStats {
    pub count: usize,
    pub sum: Vec<f64>,
    pub outer: Vec<f64>,
}

impl ClusterStats {
    pub fn empty(d: usize) -> Self {
        ClusterStats {
            count: 0,
            sum: vec![0.0; d],
            outer: vec![0.0; d * d],
        }
    }

    pub fn add(&mut self, x: &[f64]) {
        self.update(x, 1.0);
        self.count += 1;
    }

    pub fn remove(&mut self, x: &[f64]) {
        self.update(x, -1.0);
        self.count -= 1;
    }

    fn update(&mut self, x: &[f64], sign: f64) {
        let d = x.len();
        for i in 0..d {
            self.sum[i] += sign * x[i];
            for j in 0..d {
                self.outer[i * d + j] += sign * x[i] * x[j];
            }
        }
    }
}

/// Student-t posterior predictive of one cluster, ready for evaluation.
#[derive(Clone, Debug)]
struct Predictive {
    loc: Vec<f64>,
    chol: Vec<f64>,
    dof: f64,
    log_const: f64,
}

impl Predictive {
    fn new(stats: &ClusterStats, niw: &NiwParams) -> Result<Self> {
        let d = niw.dim();
        let n = stats.count as f64;
        let kn = niw.kappa0 + n;
        let nun = niw.nu0 + n;
        let loc: Vec<f64> = (0..d)
            .map(|i| (niw.kappa0 * niw.mean0[i] + stats.sum[i]) / kn)
            .collect();
        let dof = nun - d as f64 + 1.0;
        let factor = (kn + 1.0) / (kn * dof);
        let mut scale = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let psi = niw.scale0[i * d + j]
                    + stats.outer[i * d + j]
                    + niw.kappa0 * niw.mean0[i] * niw.mean0[j]
                    - kn * loc[i] * loc[j];
                scale[i * d + j] = psi * factor;
            }
        }
        let chol = cholesky(&scale, d).ok_or_else(|| {
            Error::Numerical("posterior scale matrix lost positive definiteness".into())
        })?;
        let half_logdet: f64 = (0..d).map(|i| chol[i * d + i].ln()).sum();
        let df = d as f64;
        let log_const = ln_gamma(0.5 * (dof + df))
            - ln_gamma(0.5 * dof)
            - 0.5 * df * (dof * std::f64::consts::PI).ln()
            - half_logdet;
        Ok(Predictive {
            loc,
            chol,
            dof,
            log_const,
        })
    }

    fn log_density(&self, x: &[f64], work: &mut [f64]) -> f64 {
        let d = x.len();
        let mut delta = 0.0;
        for i in 0..d {
            let mut s = x[i] - self.loc[i];
            for k in 0..i {
                s -= self.chol[i * d + k] * work[k];
            }
            let z = s / self.chol[i * d + i];
            work[i] = z;
            delta += z * z;
        }
        self.log_const - 0.5 * (self.dof + d as f64) * (delta / self.dof).ln_1p()
    }
}

/// Log density of the posterior predictive of a cluster at x.
pub fn log_posterior_predictive(stats: &ClusterStats, x: &[f64], niw: &NiwParams) -> Result<f64> {
    if x.len() != niw.dim() || stats.sum.len() != niw.dim() {
        return Err(Error::SizeMismatch(
            "point, statistics and prior dimensions differ".into(),
        ));
    }
    let mut work = vec![0.0; x.len()];
    Ok(Predictive::new(stats, niw)?.log_density(x, &mut work))
}

/// Prior on the mixture precision α.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrecisionPrior {
    Fixed { alpha: f64 },
    StirlingGamma { params: StirlingGammaParams },
}

impl PrecisionPrior {
    pub fn fixed(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Parameter(format!(
                "fixed α must be positive, got {alpha}"
            )));
        }
        Ok(PrecisionPrior::Fixed { alpha })
    }
}

#[derive(Clone, Debug)]
struct Cluster {
    stats: ClusterStats,
    pred: Predictive,
}

/// Assignments, per-cluster statistics and the current precision.
#[derive(Clone, Debug)]
pub struct MixtureChainState {
    labels: Vec<u32>,
    clusters: Vec<Cluster>,
    alpha: f64,
    prior_pred: Predictive,
}

impl MixtureChainState {
    /// All points in one cluster.
    pub fn one_cluster(data: &Dataset, niw: &NiwParams, alpha: f64) -> Result<Self> {
        let labels = vec![0u32; data.len()];
        Self::from_labels(data, niw, &labels, alpha)
    }

    pub fn from_labels(
        data: &Dataset,
        niw: &NiwParams,
        labels: &[u32],
        alpha: f64,
    ) -> Result<Self> {
        if data.dim() != niw.dim() {
            return Err(Error::SizeMismatch(format!(
                "data dimension {} differs from prior dimension {}",
                data.dim(),
                niw.dim()
            )));
        }
        if labels.len() != data.len() || data.is_empty() {
            return Err(Error::SizeMismatch(
                "labels and data differ in length".into(),
            ));
        }
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("α must be positive, got {alpha}")));
        }
        let part = Partition::from_labels(labels)?;
        let mut clusters = Vec::with_capacity(part.k());
        for _ in 0..part.k() {
            clusters.push(ClusterStats::empty(data.dim()));
        }
        for (i, &l) in part.labels().iter().enumerate() {
            clusters[l as usize].add(data.point(i));
        }
        let clusters = clusters
            .into_iter()
            .map(|stats| {
                let pred = Predictive::new(&stats, niw)?;
                Ok(Cluster { stats, pred })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MixtureChainState {
            labels: part.labels().to_vec(),
            clusters,
            alpha,
            prior_pred: Predictive::new(&ClusterStats::empty(data.dim()), niw)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn partition(&self) -> Partition {
        let sizes = self.clusters.iter().map(|c| c.stats.count).collect();
        Partition::from_canonical(self.labels.clone(), sizes)
    }

    pub fn cluster_stats(&self, j: usize) -> &ClusterStats {
        &self.clusters[j].stats
    }

    /// Compares the running statistics with a recomputation from scratch.
    pub fn check_consistency(&self, data: &Dataset, tol: f64) -> Result<()> {
        let mut fresh: Vec<ClusterStats> = (0..self.clusters.len())
            .map(|_| ClusterStats::empty(data.dim()))
            .collect();
        for (i, &l) in self.labels.iter().enumerate() {
            fresh[l as usize].add(data.point(i));
        }
        for (c, f) in self.clusters.iter().zip(&fresh) {
            if c.stats.count != f.count {
                return Err(Error::Numerical(
                    "cluster counts drifted from assignments".into(),
                ));
            }
            let close = |a: &[f64], b: &[f64]| {
                a.iter()
                    .zip(b)
                    .all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
            };
            if !close(&c.stats.sum, &f.sum) || !close(&c.stats.outer, &f.outer) {
                return Err(Error::Numerical(
                    "cluster sufficient statistics drifted".into(),
                ));
            }
        }
        Ok(())
    }
}

fn sample_log_weights<R: Rng + ?Sized>(w: &mut [f64], rng: &mut R) -> usize {
    let max = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in w.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, v) in w.iter().enumerate() {
        acc += v;
        if u < acc {
            return i;
        }
    }
    w.len() - 1
}

/// One sequential sweep over the data reassigning each point.
pub fn gibbs_sweep_assignments<R: Rng + ?Sized>(
    state: &mut MixtureChainState,
    data: &Dataset,
    niw: &NiwParams,
    rng: &mut R,
) -> Result<()> {
    let d = data.dim();
    let mut work = vec![0.0; d];
    let mut weights: Vec<f64> = Vec::new();
    let ln_alpha = state.alpha.ln();
    for i in 0..data.len() {
        let x = data.point(i);
        let c = state.labels[i] as usize;
        state.clusters[c].stats.remove(x);
        if state.clusters[c].stats.count == 0 {
            let last = state.clusters.len() - 1;
            state.clusters.swap_remove(c);
            if c != last {
                for l in state.labels.iter_mut() {
                    if *l as usize == last {
                        *l = c as u32;
                    }
                }
            }
        } else {
            state.clusters[c].pred = Predictive::new(&state.clusters[c].stats, niw)?;
        }
        weights.clear();
        for cl in &state.clusters {
            weights.push((cl.stats.count as f64).ln() + cl.pred.log_density(x, &mut work));
        }
        weights.push(ln_alpha + state.prior_pred.log_density(x, &mut work));
        let j = sample_log_weights(&mut weights, rng);
        if j == state.clusters.len() {
            state.clusters.push(Cluster {
                stats: ClusterStats::empty(d),
                pred: state.prior_pred.clone(),
            });
        }
        state.clusters[j].stats.add(x);
        state.clusters[j].pred = Predictive::new(&state.clusters[j].stats, niw)?;
        state.labels[i] = j as u32;
    }
    relabel(state);
    Ok(())
}

/// Renumbers clusters in order of first appearance.
fn relabel(state: &mut MixtureChainState) {
    let k = state.clusters.len();
    let mut map = vec![u32::MAX; k];
    let mut next = 0u32;
    for l in state.labels.iter_mut() {
        if map[*l as usize] == u32::MAX {
            map[*l as usize] = next;
            next += 1;
        }
        *l = map[*l as usize];
    }
    let mut old: Vec<Option<Cluster>> = state.clusters.drain(..).map(Some).collect();
    let mut ordered: Vec<(u32, usize)> = map.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    ordered.sort_unstable();
    state.clusters = ordered
        .into_iter()
        .map(|(_, i)| old[i].take().unwrap())
        .collect();
}

/// Draws α from Sg(a + k, b + 1, n) given the current partition.
pub fn gibbs_step_alpha<R: Rng + ?Sized>(
    state: &mut MixtureChainState,
    prior: &PrecisionPrior,
    rng: &mut R,
) -> Result<()> {
    match prior {
        PrecisionPrior::Fixed { .. } => Ok(()),
        PrecisionPrior::StirlingGamma { params } => {
            let n = state.labels.len() as u64;
            let post = posterior_single(params, state.clusters.len() as u64, n)?;
            state.alpha = StirlingGammaSampler::new(post)?.sample(rng)?;
            Ok(())
        }
    }
}

/// Chain length and bookkeeping options.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MixtureConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Sweeps between sufficient-statistic checks.
    pub check_every: usize,
    pub store_partitions: bool,
    pub coclustering: bool,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            iterations: 20_000,
            burn_in: 5_000,
            thin: 1,
            check_every: 500,
            store_partitions: false,
            coclustering: true,
        }
    }
}

/// Post-burn-in output of one chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixtureTrace {
    /// Iteration index (1-based) of each retained draw.
    pub iterations: Vec<usize>,
    pub num_clusters: Vec<usize>,
    pub alpha: Vec<f64>,
    pub partitions: Option<Vec<Partition>>,
    /// Row-major n×n co-clustering frequencies.
    pub coclustering: Option<Vec<f64>>,
}

impl MixtureTrace {
    /// Posterior histogram of K_n on 1..=n.
    pub fn cluster_count_histogram(&self, n: usize) -> Vec<f64> {
        crate::diagnostics::histogram(&self.num_clusters, n)
    }
}

/// Adds the co-clustering indicator of the current state to `acc`.
fn accumulate_coclustering(state: &MixtureChainState, acc: &mut [f64]) {
    let n = state.labels.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); state.clusters.len()];
    for (i, &l) in state.labels.iter().enumerate() {
        members[l as usize].push(i);
    }
    for m in &members {
        for &i in m {
            let row = &mut acc[i * n..(i + 1) * n];
            for &j in m {
                row[j] += 1.0;
            }
        }
    }
}

/// Runs the sampler: an assignment sweep then an α step per iteration.
pub fn run_chain<R: Rng + ?Sized>(
    data: &Dataset,
    niw: &NiwParams,
    prior: &PrecisionPrior,
    config: &MixtureConfig,
    rng: &mut R,
) -> Result<MixtureTrace> {
    if config.iterations <= config.burn_in {
        return Err(Error::Parameter(format!(
            "iterations ({}) must exceed burn-in ({})",
            config.iterations, config.burn_in
        )));
    }
    let n = data.len();
    let alpha0 = match prior {
        PrecisionPrior::Fixed { alpha } => *alpha,
        PrecisionPrior::StirlingGamma { params } => {
            if params.m() != n as u64 {
                return Err(Error::Conjugacy {
                    m: params.m(),
                    n: n as u64,
                });
            }
            StirlingGammaSampler::new(*params)?.sample(rng)?
        }
    };
    let mut state = MixtureChainState::one_cluster(data, niw, alpha0)?;
    let thin = config.thin.max(1);
    let mut trace = MixtureTrace {
        iterations: Vec::new(),
        num_clusters: Vec::new(),
        alpha: Vec::new(),
        partitions: config.store_partitions.then(Vec::new),
        coclustering: None,
    };
    let mut cocl = if config.coclustering {
        vec![0.0; n * n]
    } else {
        Vec::new()
    };
    let mut kept = 0usize;
    for it in 1..=config.iterations {
        gibbs_sweep_assignments(&mut state, data, niw, rng)?;
        gibbs_step_alpha(&mut state, prior, rng)?;
        if config.check_every > 0 && it % config.check_every == 0 {
            state.check_consistency(data, 1e-8)?;
        }
        if it > config.burn_in && (it - config.burn_in).is_multiple_of(thin) {
            trace.iterations.push(it);
            trace.num_clusters.push(state.num_clusters());
            trace.alpha.push(state.alpha);
            if let Some(p) = trace.partitions.as_mut() {
                p.push(state.partition());
            }
            if config.coclustering {
                accumulate_coclustering(&state, &mut cocl);
            }
            kept += 1;
        }
    }
    if config.coclustering {
        let k = kept.max(1) as f64;
        cocl.iter_mut().for_each(|v| *v /= k);
        trace.coclustering = Some(cocl);
    }
    Ok(trace)
}

/// Generator for chain `index` derived from a base seed.
pub fn chain_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs independent chains in parallel, chain c using `chain_rng(seed, c)`.
pub fn run_chains(
    data: &Dataset,
    niw: &NiwParams,
    prior: &PrecisionPrior,
    config: &MixtureConfig,
    seed: u64,
    chains: usize,
) -> Result<Vec<MixtureTrace>> {
    (0..chains)
        .into_par_iter()
        .map(|c| run_chain(data, niw, prior, config, &mut chain_rng(seed, c as u64)))
        .collect()
}

/// Centres of the equal-weight four-component benchmark mixture.
pub const FOUR_COMPONENT_MEANS: [[f64; 2]; 4] =
    [[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]];
/// Per-coordinate variance of each component.
pub const FOUR_COMPONENT_VARIANCE: f64 = 0.15;

/// n draws from the equal-weight mixture of N(c, 0.15 I) over the four centres.
pub fn simulate_four_component_data<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::Domain(format!("need at least 4 points, got {n}")));
    }
    let noise = Normal::new(0.0, FOUR_COMPONENT_VARIANCE.sqrt()).unwrap();
    let mut v = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let c = FOUR_COMPONENT_MEANS[rng.random_range(0..4)];
        v.push(c[0] + noise.sample(rng));
        v.push(c[1] + noise.sample(rng));
    }
    Dataset::new(2, v)
}

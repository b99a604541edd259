//! Exact random-variate generation for Sg(a, b, m).
//!
//! For a − b ≥ 1 a ratio-of-uniforms scheme is used. Otherwise, and whenever
//! α²S(α) is unbounded, draws come from rejection against a scaled beta-prime
//! proposal whose tail matches the target.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::distribution::StirlingGammaParams;
use crate::error::{Error, Result};
use crate::special::{ln_gamma, ln_rising};

/// Consecutive rejections tolerated before a draw is declared failed.
pub const REJECTION_BUDGET: u64 = 1_000_000;

/// Which rejection scheme a sampler uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    RatioOfUniforms,
    BetaPrime,
}

/// Suprema used by the ratio-of-uniforms scheme, on the log scale.
#[derive(Clone, Copy, Debug)]
pub struct RouBounds {
    /// log sup S(α).
    pub log_mu: f64,
    /// log sup α² S(α).
    pub log_mv: f64,
    /// Maximizer of S, or `None` when the supremum is the limit at zero.
    pub argmax_u: Option<f64>,
    /// Maximizer of α²S; infinite when the supremum is the limit at infinity.
    pub argmax_v: f64,
}

impl RouBounds {
    pub fn mu(&self) -> f64 {
        self.log_mu.exp()
    }
    pub fn mv(&self) -> f64 {
        self.log_mv.exp()
    }
}

/// d/dα log S(α) + extra/α, with S the unnormalized density.
fn score(p: &StirlingGammaParams, alpha: f64, extra: f64) -> f64 {
    let m = p.m();
    let sum = if m <= 64 {
        (1..m).map(|i| 1.0 / (alpha + i as f64)).sum::<f64>()
    } else {
        crate::special::psi(alpha + m as f64) - crate::special::psi(alpha + 1.0)
    };
    (p.a() - p.b() - 1.0 + extra) / alpha - p.b() * sum
}

/// Root of the decreasing score on (1e-12, 1e8) by bisection in log α.
fn maximize(p: &StirlingGammaParams, extra: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1e-12f64.ln(), 1e8f64.ln());
    if !(score(p, lo.exp(), extra) > 0.0) || !(score(p, hi.exp(), extra) < 0.0) {
        return Err(Error::Numerical(format!(
            "no stationary point of the log density bracketed on (1e-12, 1e8) for {p}"
        )));
    }
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if score(p, mid.exp(), extra) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Ratio-of-uniforms bounds; requires a − b ≥ 1 and a + 1 ≤ mb.
pub fn ratio_of_uniforms_bounds(p: &StirlingGammaParams) -> Result<RouBounds> {
    let (a, b, m) = (p.a(), p.b(), p.m() as f64);
    if a - b < 1.0 {
        return Err(Error::Parameter(format!(
            "ratio-of-uniforms needs a − b ≥ 1, got a − b = {}",
            a - b
        )));
    }
    if a + 1.0 > m * b {
        return Err(Error::Parameter(format!(
            "ratio-of-uniforms needs a + 1 ≤ mb so that α²S(α) is bounded, got a = {a}, mb = {}",
            m * b
        )));
    }
    let (log_mu, argmax_u) = if a - b == 1.0 {
        // S decreases from its limit 1/Γ(m)^b at zero.
        (-b * ln_gamma(m), None)
    } else {
        let x = maximize(p, 0.0)?;
        (p.ln_kernel(x), Some(x))
    };
    let (log_mv, argmax_v) = if a + 1.0 == m * b {
        // α²S(α) tends to 1 at infinity; an interior maximum may exceed it.
        match maximize(p, 2.0) {
            Ok(x) if p.ln_kernel(x) + 2.0 * x.ln() > 0.0 => (p.ln_kernel(x) + 2.0 * x.ln(), x),
            _ => (0.0, f64::INFINITY),
        }
    } else {
        let x = maximize(p, 2.0)?;
        (p.ln_kernel(x) + 2.0 * x.ln(), x)
    };
    Ok(RouBounds {
        log_mu,
        log_mv,
        argmax_u,
        argmax_v,
    })
}

/// r · x / (1 − x) with x ~ Beta(a0, b0).
pub fn beta_prime_sample<R: Rng + ?Sized>(a0: f64, b0: f64, r: f64, rng: &mut R) -> Result<f64> {
    if !(a0 > 0.0 && b0 > 0.0 && r > 0.0) {
        return Err(Error::Parameter(format!(
            "beta-prime law needs positive parameters, got ({a0}, {b0}, {r})"
        )));
    }
    let beta = Beta::new(a0, b0).map_err(|e| Error::Parameter(e.to_string()))?;
    let x: f64 = beta.sample(rng);
    Ok(r * x / (1.0 - x))
}

#[derive(Clone, Debug)]
enum Method {
    Rou { half_ln_mu: f64, half_ln_mv: f64 },
    BetaPrime { beta: Beta<f64>, r: f64, ln_r: f64 },
}

/// Reusable exact sampler for one parameter set.
#[derive(Clone, Debug)]
pub struct StirlingGammaSampler {
    params: StirlingGammaParams,
    method: Method,
}

impl StirlingGammaSampler {
    pub fn new(params: StirlingGammaParams) -> Result<Self> {
        let (a, b, m) = (params.a(), params.b(), params.m() as f64);
        let method = if a - b >= 1.0 && a + 1.0 < m * b {
            let bounds = ratio_of_uniforms_bounds(&params)?;
            Method::Rou {
                half_ln_mu: 0.5 * bounds.log_mu,
                half_ln_mv: 0.5 * bounds.log_mv,
            }
        } else {
            let ln_r = ln_gamma(m) / (m - 1.0);
            let beta = Beta::new(a - b, m * b - a).map_err(|e| Error::Parameter(e.to_string()))?;
            Method::BetaPrime {
                beta,
                r: ln_r.exp(),
                ln_r,
            }
        };
        Ok(StirlingGammaSampler { params, method })
    }

    pub fn params(&self) -> &StirlingGammaParams {
        &self.params
    }

    pub fn kind(&self) -> SamplerKind {
        match self.method {
            Method::Rou { .. } => SamplerKind::RatioOfUniforms,
            Method::BetaPrime { .. } => SamplerKind::BetaPrime,
        }
    }

    /// Probability that one proposal is accepted, from the normalizing constant.
    pub fn acceptance_probability(&self) -> Result<f64> {
        let ln_s = self.params.log_norm_const()?;
        let (a, b, m) = (self.params.a(), self.params.b(), self.params.m() as f64);
        Ok(match self.method {
            Method::Rou {
                half_ln_mu,
                half_ln_mv,
            } => (ln_s - std::f64::consts::LN_2 - half_ln_mu - half_ln_mv).exp(),
            Method::BetaPrime { ln_r, .. } => {
                let ln_beta = ln_gamma(a - b) + ln_gamma(m * b - a) - ln_gamma(m * b - b);
                ((m * b - a) * ln_r + ln_s - ln_beta).exp()
            }
        })
    }

    /// log of the beta-prime acceptance function
    /// (α + r)^{b(m−1)} / {(α+1)_{m−1}}^b.
    fn ln_accept(&self, y: f64, r: f64) -> f64 {
        let b = self.params.b();
        let m = self.params.m();
        b * ((m - 1) as f64 * (y + r).ln() - ln_rising(y + 1.0, m - 1))
    }

    /// One exact draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(self.sample_counted(rng)?.0)
    }

    /// One exact draw and the number of proposals it took.
    pub fn sample_counted<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, u64)> {
        for trial in 1..=REJECTION_BUDGET {
            match &self.method {
                Method::Rou {
                    half_ln_mu,
                    half_ln_mv,
                } => {
                    let ln_u = rng.random::<f64>().ln() + half_ln_mu;
                    let ln_v = rng.random::<f64>().ln() + half_ln_mv;
                    let alpha = (ln_v - ln_u).exp();
                    if !(alpha > 0.0 && alpha.is_finite()) {
                        continue;
                    }
                    if 2.0 * ln_u <= self.params.ln_kernel(alpha) {
                        return Ok((alpha, trial));
                    }
                }
                Method::BetaPrime { beta, r, .. } => {
                    let x: f64 = beta.sample(rng);
                    let y = r * x / (1.0 - x);
                    if !(y > 0.0 && y.is_finite()) {
                        continue;
                    }
                    if rng.random::<f64>().ln() <= self.ln_accept(y, *r) {
                        return Ok((y, trial));
                    }
                }
            }
        }
        Err(Error::RejectionBudget(REJECTION_BUDGET))
    }
}

/// One exact draw from Sg(a, b, m).
pub fn sample<R: Rng + ?Sized>(p: &StirlingGammaParams, rng: &mut R) -> Result<f64> {
    StirlingGammaSampler::new(*p)?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sg(a: f64, b: f64, m: u64) -> StirlingGammaParams {
        StirlingGammaParams::new(a, b, m).unwrap()
    }

    #[test]
    fn bounds_example() {
        let bd = ratio_of_uniforms_bounds(&sg(2.0, 1.0, 3)).unwrap();
        assert!((bd.mu() - 0.5).abs() < 1e-15);
        assert!(bd.argmax_u.is_none());
        // α²/((α+1)(α+2)) increases to 1.
        assert!(bd.mv() == 1.0 && bd.argmax_v.is_infinite());
        assert!(ratio_of_uniforms_bounds(&sg(2.5, 1.0, 3)).is_err());
        assert!(ratio_of_uniforms_bounds(&sg(0.6, 0.2, 149)).is_err());
    }

    #[test]
    fn bounds_are_stationary() {
        for p in [sg(5.0, 1.0, 100), sg(10.0, 5.0, 1000), sg(3.0, 0.2, 100)] {
            let bd = ratio_of_uniforms_bounds(&p).unwrap();
            let x = bd.argmax_u.unwrap();
            assert!(score(&p, x, 0.0).abs() < 1e-6, "{p}");
            assert!(score(&p, bd.argmax_v, 2.0).abs() < 1e-6, "{p}");
            // Nearby points are not higher.
            for f in [0.99, 1.01] {
                assert!(p.ln_kernel(x * f) <= bd.log_mu + 1e-12);
            }
        }
    }

    #[test]
    fn dispatch() {
        assert_eq!(
            StirlingGammaSampler::new(sg(5.0, 1.0, 100)).unwrap().kind(),
            SamplerKind::RatioOfUniforms
        );
        assert_eq!(
            StirlingGammaSampler::new(sg(0.6, 0.2, 149)).unwrap().kind(),
            SamplerKind::BetaPrime
        );
        // a − b ≥ 1 but α²S unbounded.
        assert_eq!(
            StirlingGammaSampler::new(sg(2.5, 1.0, 3)).unwrap().kind(),
            SamplerKind::BetaPrime
        );
    }

    #[test]
    fn beta_prime_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| beta_prime_sample(2.0, 3.0, 1.0, &mut rng).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        // Variance of BeP(2,3,1) is a(a+b−1)/((b−2)(b−1)²) = 2.
        let se = (2.0f64 / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}");

        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x = beta_prime_sample(0.7, 2.0, 1.5, &mut r1).unwrap();
            let y = beta_prime_sample(0.7, 2.0, 3.0, &mut r2).unwrap();
            assert!((y - 2.0 * x).abs() <= 1e-12 * y);
        }
        assert!(beta_prime_sample(0.0, 1.0, 1.0, &mut r1).is_err());
    }

    #[test]
    fn same_seed_same_draws() {
        let s = StirlingGammaSampler::new(sg(5.0, 1.0, 100)).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(3);
        let mut r2 = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_eq!(s.sample(&mut r1).unwrap(), s.sample(&mut r2).unwrap());
        }
    }

    #[test]
    fn mean_matches_first_moment() {
        let p = sg(5.0, 1.0, 100);
        let s = StirlingGammaSampler::new(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let d: Vec<f64> = (0..n).map(|_| s.sample(&mut rng).unwrap()).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let want = p.moment(1.0).unwrap().value();
        assert!(
            (mean - want).abs() < 3.0 * (var / n as f64).sqrt(),
            "{mean} vs {want}"
        );
    }

    #[test]
    fn acceptance_matches_empirical_rate() {
        for p in [sg(3.0, 1.5, 100), sg(0.7, 0.5, 1000)] {
            let s = StirlingGammaSampler::new(p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let n = 20_000;
            let trials: u64 = (0..n).map(|_| s.sample_counted(&mut rng).unwrap().1).sum();
            let rate = n as f64 / trials as f64;
            let theory = s.acceptance_probability().unwrap();
            assert!((rate - theory).abs() < 0.02, "{p}: {rate} vs {theory}");
        }
    }
}

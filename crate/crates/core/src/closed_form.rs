//! Exact evaluation of the normalizing constant S_{a,b,m} and of the
//! coefficients V_{a,b,m}(n,k) for integer a and b.
//!
//! Both are integrals of a rational function α^c / ∏_r (α + r)^{μ_r} with
//! positive integer roots. A partial-fraction expansion, with coefficients
//! from complete Bell polynomials of the log-derivatives, gives an alternating
//! sum of logarithms and powers. The sum cancels heavily as m grows, so it is
//! carried out in double-double arithmetic and refused once the largest term
//! exceeds the result by more than a configured factor.

use crate::dd::Dd;
use crate::distribution::StirlingGammaParams;
use crate::error::{Error, Result};

/// Limits for the closed-form path.
#[derive(Clone, Copy, Debug)]
pub struct ClosedFormConfig {
    /// Largest m (and n) accepted.
    pub max_size: u64,
    /// Largest tolerated ratio between the biggest summand and the result.
    pub cancellation_budget: f64,
}

impl Default for ClosedFormConfig {
    fn default() -> Self {
        ClosedFormConfig {
            max_size: 60,
            cancellation_budget: 1e22,
        }
    }
}

/// Value of a closed-form evaluation with its cancellation diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct ClosedFormValue {
    pub log_value: f64,
    /// max |summand| / |result|.
    pub cancellation_ratio: f64,
}

fn integer_params(p: &StirlingGammaParams) -> Result<(u64, u64)> {
    let (a, b) = (p.a(), p.b());
    if a.fract() != 0.0 || b.fract() != 0.0 {
        return Err(Error::Parameter(format!(
            "closed forms need integer a and b, got a = {a}, b = {b}"
        )));
    }
    Ok((a as u64, b as u64))
}

/// log S_{a,b,m} by partial fractions.
pub fn log_norm_const_closed_form(p: &StirlingGammaParams) -> Result<f64> {
    Ok(norm_const_closed_form_with(p, ClosedFormConfig::default())?.log_value)
}

pub fn norm_const_closed_form_with(
    p: &StirlingGammaParams,
    cfg: ClosedFormConfig,
) -> Result<ClosedFormValue> {
    let (a, b) = integer_params(p)?;
    let m = p.m();
    if m > cfg.max_size {
        return Err(Error::CapExceeded {
            requested: m as usize,
            cap: cfg.max_size as usize,
        });
    }
    // α^{a-b-1} / ∏_{i=1}^{m-1} (α+i)^b
    let roots: Vec<(u64, u32)> = (1..m).map(|r| (r, b as u32)).collect();
    rational_integral(a - b - 1, &roots, cfg.cancellation_budget)
}

/// log V_{a,b,m}(n, k) by partial fractions.
pub fn log_v_coefficient_closed_form(p: &StirlingGammaParams, n: u64, k: u64) -> Result<f64> {
    Ok(v_coefficient_closed_form_with(p, n, k, ClosedFormConfig::default())?.log_value)
}

pub fn v_coefficient_closed_form_with(
    p: &StirlingGammaParams,
    n: u64,
    k: u64,
    cfg: ClosedFormConfig,
) -> Result<ClosedFormValue> {
    let (a, b) = integer_params(p)?;
    let m = p.m();
    if k == 0 || k > n {
        return Err(Error::Domain(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    if m.max(n) > cfg.max_size {
        return Err(Error::CapExceeded {
            requested: m.max(n) as usize,
            cap: cfg.max_size as usize,
        });
    }
    // α^{a+k-b-2} / (∏_{i<m} (α+i)^b ∏_{i<n} (α+i)); the exponent is
    // nonnegative because a > b.
    let c = a + k - b - 2;
    let roots: Vec<(u64, u32)> = (1..m.max(n))
        .map(|r| {
            let mu = (if r < m { b } else { 0 }) + u64::from(r < n);
            (r, mu as u32)
        })
        .collect();
    rational_integral(c, &roots, cfg.cancellation_budget)
}

fn dd_bell_sequence(x: &[Dd]) -> Vec<Dd> {
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(Dd::ONE);
    for t in 0..x.len() {
        let mut c = Dd::ONE;
        let mut acc = Dd::ZERO;
        for i in 0..=t {
            acc += c * out[t - i] * x[i];
            c = c * Dd::new((t - i) as f64) / Dd::new((i + 1) as f64);
        }
        out.push(acc);
    }
    out
}

/// ∫_0^∞ α^c / ∏ (α + r)^{μ_r} dα for distinct positive integer roots r,
/// requiring Σ μ_r ≥ c + 2.
pub(crate) fn rational_integral(
    c: u64,
    roots: &[(u64, u32)],
    budget: f64,
) -> Result<ClosedFormValue> {
    let degree: u64 = roots.iter().map(|&(_, mu)| mu as u64).sum();
    if degree < c + 2 {
        return Err(Error::Divergent(format!(
            "rational integrand of degree {c} over {degree} is not integrable"
        )));
    }
    let ln_r: Vec<Dd> = roots.iter().map(|&(r, _)| Dd::from_u64(r).ln()).collect();

    // Per root: log|φ_r(−r)|, its sign, and the Bell-weighted coefficients.
    struct RootTerm {
        ln_mag: Dd,
        negative: bool,
        terms: Vec<Dd>,
    }
    let mut per_root = Vec::with_capacity(roots.len());
    for (idx, &(r, mu)) in roots.iter().enumerate() {
        let mu = mu as usize;
        // φ_r(α) = α^c / ∏_{r'≠r} (α + r')^{μ'} evaluated at α = −r.
        let mut ln_mag = Dd::new(c as f64) * ln_r[idx];
        let mut negative = c % 2 == 1;
        for (j, &(r2, mu2)) in roots.iter().enumerate() {
            if j == idx {
                continue;
            }
            let diff = r2 as i64 - r as i64;
            ln_mag -= Dd::new(mu2 as f64) * Dd::from_u64(diff.unsigned_abs()).ln();
            if diff < 0 && mu2 % 2 == 1 {
                negative = !negative;
            }
        }
        // x_d = (log φ_r)^{(d)}(−r) for d = 1..μ−1.
        let mut x = Vec::with_capacity(mu.saturating_sub(1));
        let mut fact = Dd::ONE; // (d−1)!
        for d in 1..mu {
            if d > 1 {
                fact *= Dd::new((d - 1) as f64);
            }
            let rd = Dd::from_u64(r).powi(d as u32);
            let mut inner = Dd::new(c as f64) / rd;
            if d % 2 == 1 {
                inner = -inner;
            }
            for (j, &(r2, mu2)) in roots.iter().enumerate() {
                if j == idx {
                    continue;
                }
                let diff = r2 as i64 - r as i64;
                let mut t = Dd::new(mu2 as f64) / Dd::from_u64(diff.unsigned_abs()).powi(d as u32);
                if diff < 0 && d % 2 == 1 {
                    t = -t;
                }
                inner -= t;
            }
            let mut xd = fact * inner;
            if d % 2 == 0 {
                xd = -xd;
            }
            x.push(xd);
        }
        let bell = dd_bell_sequence(&x);
        // Coefficient of (α + r)^{-s} is φ_r(−r) B_{μ−s} / (μ−s)!.
        let mut terms = Vec::with_capacity(mu);
        let mut inv_fact = Dd::ONE;
        let mut coeffs = vec![Dd::ZERO; mu + 1];
        for d in 0..mu {
            if d > 0 {
                inv_fact = inv_fact / Dd::new(d as f64);
            }
            coeffs[mu - d] = bell[d] * inv_fact;
        }
        for s in 1..=mu {
            // ∫ of the s = 1 terms combines into −Σ A_{r,1} log r; the others
            // integrate to r^{1−s} / (s − 1).
            let phi = if s == 1 {
                -ln_r[idx]
            } else {
                Dd::ONE / (Dd::from_u64(r).powi((s - 1) as u32) * Dd::new((s - 1) as f64))
            };
            terms.push(coeffs[s] * phi);
        }
        per_root.push(RootTerm {
            ln_mag,
            negative,
            terms,
        });
    }

    let ln_max = per_root
        .iter()
        .map(|t| t.ln_mag)
        .fold(
            Dd::new(f64::NEG_INFINITY),
            |acc, v| if v > acc { v } else { acc },
        );
    let mut total = Dd::ZERO;
    let mut max_term = 0.0f64;
    for t in &per_root {
        let mut scale = (t.ln_mag - ln_max).exp();
        if t.negative {
            scale = -scale;
        }
        for &term in &t.terms {
            let v = scale * term;
            max_term = max_term.max(v.to_f64().abs());
            total += v;
        }
    }
    let value = total.to_f64();
    let ratio = if value != 0.0 {
        max_term / value.abs()
    } else {
        f64::INFINITY
    };
    if !(value > 0.0) || ratio > budget {
        return Err(Error::Instability { ratio, budget });
    }
    Ok(ClosedFormValue {
        log_value: ln_max.to_f64() + value.ln(),
        cancellation_ratio: ratio,
    })
}

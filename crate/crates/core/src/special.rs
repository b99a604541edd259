//! Log-space special functions: log-gamma, ascending factorials, signless
//! Stirling numbers of the first kind, harmonic numbers, Bell polynomials,
//! digamma/trigamma and the regularized incomplete gamma function.

use std::collections::BTreeMap;
use std::ops::{Add, Div, Mul};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k - 1)) for k = 1..8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const SHIFT: f64 = 15.0;

#[inline]
fn stirling_series(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    let mut acc = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        acc = acc * r2 + c;
    }
    acc * r
}

/// Natural log of the gamma function for x > 0 (NaN otherwise).
pub fn ln_gamma(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let mut z = x;
    let mut prod = 1.0;
    while z < SHIFT {
        prod *= z;
        z += 1.0;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + stirling_series(z) - prod.ln()
}

/// log Γ(z + d) − log Γ(z) for z ≥ 15 without forming the large terms separately.
#[inline]
fn ln_gamma_diff_large(z: f64, d: f64) -> f64 {
    let y = z + d;
    (z - 0.5) * (d / z).ln_1p() + d * y.ln() - d + stirling_series(y) - stirling_series(z)
}

/// log (x)_n for x > 0, unchecked.
pub(crate) fn ln_rising(x: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if n <= 8 || (x + n as f64) < SHIFT {
        let mut s = 0.0;
        let mut prod = 1.0;
        for i in 0..n {
            prod *= x + i as f64;
            if !(1e-280..=1e280).contains(&prod) {
                s += prod.ln();
                prod = 1.0;
            }
        }
        return s + prod.ln();
    }
    let mut s = 0.0;
    let mut z = x;
    let mut left = n;
    while z < SHIFT && left > 0 {
        s += z.ln();
        z += 1.0;
        left -= 1;
    }
    s + ln_gamma_diff_large(z, left as f64)
}

/// log (x)_n = log Γ(x+n) − log Γ(x).
pub fn log_ascending_factorial(x: f64, n: u64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "ascending factorial needs x > 0, got {x}"
        )));
    }
    Ok(ln_rising(x, n))
}

/// log n!
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub(crate) fn psi(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let r2 = 1.0 / (x * x);
    // B_{2k} / (2k) for k = 1..7.
    let series = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0
                        - r2 * (1.0 / 132.0 - r2 * (691.0 / 32760.0 - r2 / 12.0))))));
    acc + x.ln() - 0.5 / x - series
}

pub(crate) fn psi1(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    // Σ B_{2k} / x^{2k+1} for k = 1..7.
    let series = r2
        * r
        * (1.0 / 6.0
            - r2 * (1.0 / 30.0
                - r2 * (1.0 / 42.0
                    - r2 * (1.0 / 30.0
                        - r2 * (5.0 / 66.0 - r2 * (691.0 / 2730.0 - r2 * 7.0 / 6.0))))));
    acc + r + 0.5 * r2 + series
}

/// Digamma function ψ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma needs x > 0, got {x}")));
    }
    Ok(psi(x))
}

/// Trigamma function ψ′(x) for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("trigamma needs x > 0, got {x}")));
    }
    Ok(psi1(x))
}

/// H_{j,s} = Σ_{i=1..j} i^{-s}.
pub fn generalized_harmonic(j: u64, s: u32) -> f64 {
    let mut acc = 0.0;
    // Smallest terms first.
    for i in (1..=j).rev() {
        acc += (i as f64).powi(-(s as i32));
    }
    acc
}

/// Complete exponential Bell polynomials B_0..B_s of x_1..x_s.
pub fn bell_sequence(x: &[f64]) -> Vec<f64> {
    let s = x.len();
    let mut b = Vec::with_capacity(s + 1);
    b.push(1.0);
    for t in 0..s {
        // B_{t+1} = Σ_{i=0..t} C(t,i) B_{t-i} x_{i+1}
        let mut c = 1.0;
        let mut acc = 0.0;
        for i in 0..=t {
            acc += c * b[t - i] * x[i];
            c = c * (t - i) as f64 / (i + 1) as f64;
        }
        b.push(acc);
    }
    b
}

/// Complete exponential Bell polynomial B_s(x_1, ..., x_s); B_0 = 1.
pub fn bell_complete(x: &[f64]) -> f64 {
    *bell_sequence(x).last().unwrap()
}

/// log(e^a + e^b) with -inf treated as log 0.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log Σ exp(v_i).
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m.is_nan() {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// A nonnegative quantity stored by its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogValue {
    log_magnitude: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        log_magnitude: f64::NEG_INFINITY,
    };
    pub const ONE: LogValue = LogValue { log_magnitude: 0.0 };

    pub fn from_log(log_magnitude: f64) -> LogValue {
        LogValue { log_magnitude }
    }

    pub fn from_value(v: f64) -> Result<LogValue> {
        if v < 0.0 || v.is_nan() {
            return Err(Error::Domain(format!("LogValue needs v >= 0, got {v}")));
        }
        Ok(LogValue {
            log_magnitude: v.ln(),
        })
    }

    pub fn ln(self) -> f64 {
        self.log_magnitude
    }

    pub fn value(self) -> f64 {
        self.log_magnitude.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, o: LogValue) -> LogValue {
        LogValue::from_log(self.log_magnitude + o.log_magnitude)
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, o: LogValue) -> LogValue {
        LogValue::from_log(self.log_magnitude - o.log_magnitude)
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, o: LogValue) -> LogValue {
        LogValue::from_log(log_add_exp(self.log_magnitude, o.log_magnitude))
    }
}

/// Default cap on the Stirling-number table.
pub const DEFAULT_STIRLING_CAP: usize = 2048;

const DENSE_ROWS: usize = 256;

/// Memoized rows of log |s(n,k)|, k = 1..n.
///
/// Rows up to 256 are all kept; beyond that only requested rows are stored and
/// new rows are rolled forward from the nearest cached one.
pub struct StirlingTable {
    cap: AtomicUsize,
    rows: RwLock<BTreeMap<usize, Arc<Vec<f64>>>>,
}

impl StirlingTable {
    pub fn with_cap(cap: usize) -> StirlingTable {
        let mut rows = BTreeMap::new();
        rows.insert(1, Arc::new(vec![0.0]));
        StirlingTable {
            cap: AtomicUsize::new(cap),
            rows: RwLock::new(rows),
        }
    }

    /// The process-wide table, created with [`DEFAULT_STIRLING_CAP`].
    pub fn global() -> &'static StirlingTable {
        static TABLE: OnceLock<StirlingTable> = OnceLock::new();
        TABLE.get_or_init(|| StirlingTable::with_cap(DEFAULT_STIRLING_CAP))
    }

    pub fn cap(&self) -> usize {
        self.cap.load(Ordering::Relaxed)
    }

    pub fn set_cap(&self, cap: usize) {
        self.cap.store(cap, Ordering::Relaxed);
    }

    /// Row n: element k-1 holds log |s(n,k)|.
    pub fn row(&self, n: usize) -> Result<Arc<Vec<f64>>> {
        if n == 0 {
            return Err(Error::Domain("Stirling row needs n >= 1".into()));
        }
        let cap = self.cap();
        if n > cap {
            return Err(Error::CapExceeded { requested: n, cap });
        }
        let (start, mut row) = {
            let rows = self.rows.read().unwrap();
            if let Some(r) = rows.get(&n) {
                return Ok(r.clone());
            }
            let (s, r) = rows
                .range(..n)
                .next_back()
                .expect("row 1 is always present");
            (*s, r.as_ref().clone())
        };
        let mut dense = Vec::new();
        for cur in start..n {
            row = next_row(&row, cur);
            if cur < DENSE_ROWS && cur + 1 < n {
                dense.push((cur + 1, Arc::new(row.clone())));
            }
        }
        let row = Arc::new(row);
        let mut rows = self.rows.write().unwrap();
        for (k, r) in dense {
            rows.entry(k).or_insert(r);
        }
        rows.insert(n, row.clone());
        Ok(row)
    }

    /// log |s(n,k)|.
    pub fn ln_stirling(&self, n: usize, k: usize) -> Result<f64> {
        if k == 0 || k > n {
            return Err(Error::Domain(format!(
                "Stirling number needs 1 <= k <= n, got n = {n}, k = {k}"
            )));
        }
        Ok(self.row(n)?[k - 1])
    }
}

/// |s(n+1,k)| = n |s(n,k)| + |s(n,k-1)| in log space.
fn next_row(row: &[f64], n: usize) -> Vec<f64> {
    let ln_n = (n as f64).ln();
    let mut out = Vec::with_capacity(n + 1);
    out.push(ln_n + row[0]);
    for k in 1..n {
        out.push(log_add_exp(ln_n + row[k], row[k - 1]));
    }
    out.push(row[n - 1]);
    out
}

/// log |s(n,k)| from the global table.
pub fn log_signless_stirling_first(n: usize, k: usize) -> Result<f64> {
    StirlingTable::global().ln_stirling(n, k)
}

/// Regularized lower incomplete gamma function P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let ln_pre = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (ln_pre + sum.ln()).exp().min(1.0)
    } else {
        1.0 - gamma_q_cf(a, x, ln_pre)
    }
}

fn gamma_q_cf(a: f64, x: f64, ln_pre: f64) -> f64 {
    // Modified Lentz for the continued fraction of Q(a, x).
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (ln_pre + h.ln()).exp()
}

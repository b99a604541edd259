//! Adaptive Gauss–Kronrod quadrature of positive integrands over (0, ∞) or a
//! sub-interval, returning the log of the integral.
//!
//! The integrand is supplied as log f(α). Integration runs in x = log α, where
//! the integrands of interest are unimodal with power-law tails. Tails beyond
//! the point where the log-log slope has settled are added analytically.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerance and budget for one integral.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            max_evals: 100_000,
        }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

const X_MIN: f64 = -700.0;
const X_MAX: f64 = 700.0;
const SCAN_LIMIT: f64 = 80.0;
/// Relative height below the peak at which the remaining tail is ignored.
const NEGLIGIBLE: f64 = -60.0;

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

struct Integrand<F> {
    log_f: F,
    shift: f64,
    evals: usize,
}

impl<F: Fn(f64) -> f64> Integrand<F> {
    /// log of the integrand in x = log α, including the Jacobian.
    fn g(&mut self, x: f64) -> f64 {
        self.evals += 1;
        let v = (self.log_f)(x.exp()) + x;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    fn gk21(&mut self, a: f64, b: f64) -> Panel {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = (self.g(c) - self.shift).exp();
        let mut kron = WGK[10] * fc;
        let mut gauss = 0.0;
        let mut abs_sum = WGK[10] * fc;
        for i in 0..10 {
            let dx = h * XGK[i];
            let f1 = (self.g(c - dx) - self.shift).exp();
            let f2 = (self.g(c + dx) - self.shift).exp();
            kron += WGK[i] * (f1 + f2);
            abs_sum += WGK[i] * (f1 + f2);
            if i % 2 == 1 {
                gauss += WG[i / 2] * (f1 + f2);
            }
        }
        let value = kron * h;
        let err = ((kron - gauss) * h)
            .abs()
            .max(50.0 * f64::EPSILON * abs_sum * h);
        Panel { a, b, value, err }
    }
}

/// log ∫_0^∞ f(α) dα given log f.
pub fn log_integral<F: Fn(f64) -> f64>(log_f: F, cfg: QuadratureConfig) -> Result<f64> {
    log_integral_range(log_f, 0.0, f64::INFINITY, cfg)
}

/// log ∫_lo^hi f(α) dα given log f, with 0 ≤ lo < hi ≤ ∞.
pub fn log_integral_range<F: Fn(f64) -> f64>(
    log_f: F,
    lo: f64,
    hi: f64,
    cfg: QuadratureConfig,
) -> Result<f64> {
    if !(lo >= 0.0) || !(hi > lo) {
        return Err(Error::Domain(format!(
            "integration range needs 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    let xlo_bound = if lo == 0.0 {
        f64::NEG_INFINITY
    } else {
        lo.ln()
    };
    let xhi_bound = if hi.is_infinite() {
        f64::INFINITY
    } else {
        hi.ln()
    };
    let open_lo = xlo_bound == f64::NEG_INFINITY;
    let open_hi = xhi_bound == f64::INFINITY;

    let mut f = Integrand {
        log_f,
        shift: 0.0,
        evals: 0,
    };

    // Coarse scan for the peak.
    let scan_lo = xlo_bound.max(-SCAN_LIMIT);
    let scan_hi = xhi_bound.min(SCAN_LIMIT);
    let npts = (((scan_hi - scan_lo) / 0.5).ceil() as usize).clamp(32, 400);
    let step = (scan_hi - scan_lo) / npts as f64;
    let mut best = (scan_lo, f64::NEG_INFINITY, 0usize);
    for i in 0..=npts {
        let x = scan_lo + step * i as f64;
        let v = f.g(x);
        if v > best.1 {
            best = (x, v, i);
        }
    }
    if best.1 == f64::NEG_INFINITY {
        return Err(Error::Numerical(
            "integrand vanishes or is undefined on the whole scan grid".into(),
        ));
    }
    if best.1 == f64::INFINITY {
        return Err(Error::Divergent("integrand is infinite".into()));
    }
    if open_lo && best.2 == 0 {
        return Err(Error::Divergent(
            "integrand does not decay towards zero".into(),
        ));
    }
    if open_hi && best.2 == npts {
        return Err(Error::Divergent(
            "integrand does not decay towards infinity".into(),
        ));
    }

    // Golden-section refinement between the neighbouring grid points.
    let mut a = (best.0 - step).max(scan_lo);
    let mut b = (best.0 + step).min(scan_hi);
    let invphi = 0.618_033_988_749_894_9;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut gc = f.g(c);
    let mut gd = f.g(d);
    for _ in 0..60 {
        if b - a < 1e-9 {
            break;
        }
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - invphi * (b - a);
            gc = f.g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + invphi * (b - a);
            gd = f.g(d);
        }
    }
    let (mut xp, mut gp) = if gc > gd { (c, gc) } else { (d, gd) };
    if best.1 > gp {
        xp = best.0;
        gp = best.1;
    }

    // Width scale from curvature at the peak, or from the slope at a bound.
    let h = 1e-3;
    let gl = f.g(xp - h);
    let gr = f.g(xp + h);
    let curv = (gl - 2.0 * gp + gr) / (h * h);
    let slope = (gr - gl) / (2.0 * h);
    let interior = xp - h > xlo_bound && xp + h < xhi_bound;
    let mut w = if interior && curv < 0.0 && curv.is_finite() {
        1.0 / (-curv).sqrt()
    } else if slope.is_finite() && slope != 0.0 {
        1.0 / slope.abs()
    } else {
        1.0
    };
    w = w.clamp(1e-3, 4.0);
    f.shift = gp;
    let mass_scale = w * 2.5;

    let (xl, tail_lo) = find_tail(&mut f, xp, w, xlo_bound, -1.0, mass_scale, cfg.rel_tol)?;
    let (xh, tail_hi) = find_tail(&mut f, xp, w, xhi_bound, 1.0, mass_scale, cfg.rel_tol)?;

    // Initial panels: uniform near the anchor, doubling outward.
    let mut breaks = vec![xp];
    let mut x = xp;
    let mut width = w;
    let mut i = 0;
    while x > xl {
        x = (x - width).max(xl);
        breaks.push(x);
        i += 1;
        if i >= 6 {
            width *= 2.0;
        }
    }
    x = xp;
    width = w;
    i = 0;
    while x < xh {
        x = (x + width).min(xh);
        breaks.push(x);
        i += 1;
        if i >= 6 {
            width *= 2.0;
        }
    }
    breaks.sort_by(|p, q| p.total_cmp(q));
    breaks.dedup();

    let mut heap = BinaryHeap::new();
    for pair in breaks.windows(2) {
        if pair[1] > pair[0] {
            heap.push(f.gk21(pair[0], pair[1]));
        }
    }
    let tails = tail_lo + tail_hi;
    loop {
        let (total, err) = totals(&heap);
        let total = total + tails;
        if !(total > 0.0) {
            return Err(Error::Numerical("integral evaluated to zero".into()));
        }
        if err <= cfg.rel_tol * total {
            return Ok(total.ln() + gp);
        }
        if f.evals + 42 > cfg.max_evals {
            return Err(Error::Convergence {
                achieved: err / total,
                requested: cfg.rel_tol,
                evaluations: f.evals,
            });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split; accept its estimate.
            heap.push(Panel { err: 0.0, ..worst });
            continue;
        }
        heap.push(f.gk21(worst.a, mid));
        heap.push(f.gk21(mid, worst.b));
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    // Neumaier summation of panel values.
    let mut s = 0.0;
    let mut comp = 0.0;
    let mut err = 0.0;
    for p in heap.iter() {
        let t = s + p.value;
        if s.abs() >= p.value.abs() {
            comp += (s - t) + p.value;
        } else {
            comp += (p.value - t) + s;
        }
        s = t;
        err += p.err;
    }
    (s + comp, err)
}

/// Walks from the anchor towards `bound` in direction `dir` until the rest of
/// the integrand is negligible or follows a settled power law. Returns the
/// truncation point and the analytic tail mass beyond it (relative to the shift).
fn find_tail<F: Fn(f64) -> f64>(
    f: &mut Integrand<F>,
    xp: f64,
    w: f64,
    bound: f64,
    dir: f64,
    mass_scale: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    let limit = if dir < 0.0 { X_MIN } else { X_MAX };
    let mut x = xp + dir * 10.0 * w;
    let mut step = 1.0f64.max(2.0 * w);
    loop {
        let past_bound = if dir < 0.0 { x <= bound } else { x >= bound };
        if past_bound {
            return Ok((bound, 0.0));
        }
        let past_limit = if dir < 0.0 { x <= limit } else { x >= limit };
        let g0 = f.g(x) - f.shift;
        let g1 = f.g(x - dir) - f.shift;
        let g2 = f.g(x - 2.0 * dir) - f.shift;
        // Secant slopes of the log integrand, oriented so decay is positive.
        let s_a = g1 - g0;
        let s_b = g2 - g1;
        if g0 < NEGLIGIBLE && g0 < g1 {
            let tail = if s_a > 0.0 { g0.exp() / s_a } else { 0.0 };
            return Ok((x, tail));
        }
        if s_a > 0.0 && s_a.is_finite() {
            let tail = g0.exp() / s_a;
            let err = tail * ((s_a - s_b) / s_a).abs();
            if err < 1e-3 * rel_tol * mass_scale {
                return Ok((x, tail));
            }
        }
        if past_limit {
            if s_a > 0.0 {
                return Ok((x, g0.exp() / s_a));
            }
            return Err(Error::Divergent(format!(
                "integrand does not decay towards {}",
                if dir < 0.0 { "zero" } else { "infinity" }
            )));
        }
        x += dir * step;
        step = (step * 1.5).min(25.0);
    }
}

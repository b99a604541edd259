//! The Stirling-gamma distribution Sg(a, b, m) with density proportional to
//! α^{a-1} / {(α)_m}^b on (0, ∞).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{log_integral, log_integral_range, QuadratureConfig};
use crate::special::{gamma_p, ln_gamma, ln_rising};

/// Validated Stirling-gamma parameters: a > 0, b > 0, m ≥ 2 and 1 < a/b < m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct StirlingGammaParams {
    a: f64,
    b: f64,
    m: u64,
}

#[derive(Deserialize)]
struct RawParams {
    a: f64,
    b: f64,
    m: u64,
}

impl TryFrom<RawParams> for StirlingGammaParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        StirlingGammaParams::new(r.a, r.b, r.m)
    }
}

impl std::fmt::Display for StirlingGammaParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Sg({}, {}, {})", self.a, self.b, self.m)
    }
}

/// Result of a moment computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Moment {
    Finite(f64),
    /// The moment is infinite. `boundary` marks s = mb − a exactly, where the
    /// defining integral diverges logarithmically.
    Infinite {
        boundary: bool,
    },
}

impl Moment {
    pub fn value(self) -> f64 {
        match self {
            Moment::Finite(v) => v,
            Moment::Infinite { .. } => f64::INFINITY,
        }
    }
}

impl StirlingGammaParams {
    pub fn new(a: f64, b: f64, m: u64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Parameter(format!(
                "a must be positive and finite, got {a}"
            )));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Parameter(format!(
                "b must be positive and finite, got {b}"
            )));
        }
        if m < 2 {
            return Err(Error::Parameter(format!("m must be at least 2, got {m}")));
        }
        let loc = a / b;
        if !(loc > 1.0) {
            return Err(Error::Parameter(format!(
                "need 1 < a/b < m, but a/b = {loc} (a = {a}, b = {b}, m = {m})"
            )));
        }
        if !(loc < m as f64) {
            return Err(Error::Parameter(format!(
                "need 1 < a/b < m, but a/b = {loc} is not below m = {m} (a = {a}, b = {b})"
            )));
        }
        Ok(StirlingGammaParams { a, b, m })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// a/b, the expected number of clusters at the reference size.
    pub fn location(&self) -> f64 {
        self.a / self.b
    }

    /// log S(α) without argument checks.
    #[inline]
    pub(crate) fn ln_kernel(&self, alpha: f64) -> f64 {
        ln_kernel(self.a, self.b, self.m, alpha)
    }

    /// (a − 1) log α − b log (α)_m.
    pub fn log_unnormalized_density(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.ln_kernel(alpha))
    }

    /// log S_{a,b,m} by adaptive quadrature.
    pub fn log_norm_const(&self) -> Result<f64> {
        self.log_norm_const_with(QuadratureConfig::default())
    }

    pub fn log_norm_const_with(&self, cfg: QuadratureConfig) -> Result<f64> {
        let p = *self;
        log_integral(move |x| p.ln_kernel(x), cfg)
    }

    /// log S_{a,b,m} from the exact alternating sum; needs integer a and b.
    pub fn log_norm_const_closed_form(&self) -> Result<f64> {
        crate::closed_form::log_norm_const_closed_form(self)
    }

    /// Normalized log density; computes the normalizing constant on each call.
    /// Use [`StirlingGamma`] to evaluate many points.
    pub fn log_pdf(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.ln_kernel(alpha) - self.log_norm_const()?)
    }

    /// E(α^s) for s > 0.
    pub fn moment(&self, s: f64) -> Result<Moment> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!(
                "moment order must be positive, got {s}"
            )));
        }
        let crit = self.m as f64 * self.b - self.a;
        if s > crit {
            return Ok(Moment::Infinite { boundary: false });
        }
        if s == crit {
            return Ok(Moment::Infinite { boundary: true });
        }
        let (a, b, m) = (self.a + s, self.b, self.m);
        let num = log_integral(move |x| ln_kernel(a, b, m, x), QuadratureConfig::default())?;
        Ok(Moment::Finite((num - self.log_norm_const()?).exp()))
    }

    /// The approximating gamma law Ga(a − b, b log m) for α.
    pub fn gamma_limit(&self) -> Result<GammaParams> {
        GammaParams::new(self.a - self.b, self.b * (self.m as f64).ln())
    }

    /// log E[h(α)] for a positive function given as log h.
    pub fn log_expectation<F: Fn(f64) -> f64>(&self, log_h: F) -> Result<f64> {
        let p = *self;
        let num = log_integral(
            move |x| p.ln_kernel(x) + log_h(x),
            QuadratureConfig::default(),
        )?;
        Ok(num - self.log_norm_const()?)
    }

    /// Normalizes the density once for repeated evaluation.
    pub fn normalized(&self) -> Result<StirlingGamma> {
        StirlingGamma::new(*self)
    }
}

#[inline]
pub(crate) fn ln_kernel(a: f64, b: f64, m: u64, alpha: f64) -> f64 {
    // α^{a-b-1} / ∏_{i=1}^{m-1} (α+i)^b keeps small α exact.
    (a - b - 1.0) * alpha.ln() - b * ln_rising(alpha + 1.0, m - 1)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "α must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}

/// A Stirling-gamma law with its normalizing constant computed.
#[derive(Clone, Copy, Debug)]
pub struct StirlingGamma {
    params: StirlingGammaParams,
    log_norm: f64,
}

impl StirlingGamma {
    pub fn new(params: StirlingGammaParams) -> Result<Self> {
        Ok(StirlingGamma {
            params,
            log_norm: params.log_norm_const()?,
        })
    }

    pub fn params(&self) -> &StirlingGammaParams {
        &self.params
    }

    pub fn log_norm_const(&self) -> f64 {
        self.log_norm
    }

    pub fn log_pdf(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.params.ln_kernel(alpha) - self.log_norm)
    }

    /// log P(α ≤ x) by quadrature.
    pub fn log_cdf(&self, x: f64) -> Result<f64> {
        check_alpha(x)?;
        let p = self.params;
        Ok(
            log_integral_range(move |t| p.ln_kernel(t), 0.0, x, QuadratureConfig::default())?
                - self.log_norm,
        )
    }

    /// log P(α > x) by quadrature of the upper tail.
    pub fn log_survival(&self, x: f64) -> Result<f64> {
        check_alpha(x)?;
        let p = self.params;
        Ok(log_integral_range(
            move |t| p.ln_kernel(t),
            x,
            f64::INFINITY,
            QuadratureConfig::default(),
        )? - self.log_norm)
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.log_cdf(x)?.exp())
    }
}

/// Gamma distribution with shape and rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0) || !(rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
            return Err(Error::Parameter(format!(
                "gamma law needs positive shape and rate, got shape = {shape}, rate = {rate}"
            )));
        }
        Ok(GammaParams { shape, rate })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() + (self.shape - 1.0) * x.ln()
            - self.rate * x
            - ln_gamma(self.shape)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        gamma_p(self.shape, self.rate * x)
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sg(a: f64, b: f64, m: u64) -> StirlingGammaParams {
        StirlingGammaParams::new(a, b, m).unwrap()
    }

    #[test]
    fn validation() {
        assert!(StirlingGammaParams::new(2.0, 1.0, 3).is_ok());
        assert!(StirlingGammaParams::new(3.0, 1.0, 3).is_err());
        assert!(StirlingGammaParams::new(1.0, 1.0, 10).is_err());
        assert!(StirlingGammaParams::new(2.0, 1.0, 1).is_err());
        assert!(StirlingGammaParams::new(-2.0, -1.0, 10).is_err());
        assert!(StirlingGammaParams::new(f64::NAN, 1.0, 10).is_err());
        let e = StirlingGammaParams::new(3.0, 1.0, 3)
            .unwrap_err()
            .to_string();
        assert!(e.contains("below m"), "{e}");
    }

    #[test]
    fn serde_validates() {
        let p: StirlingGammaParams = serde_json::from_str(r#"{"a":2.0,"b":1.0,"m":3}"#).unwrap();
        assert_eq!(p, sg(2.0, 1.0, 3));
        assert!(serde_json::from_str::<StirlingGammaParams>(r#"{"a":3.0,"b":1.0,"m":3}"#).is_err());
    }

    #[test]
    fn unnormalized_density_examples() {
        let p = sg(2.0, 1.0, 3);
        assert!((p.log_unnormalized_density(1.0).unwrap() - (1.0f64 / 6.0).ln()).abs() < 1e-15);
        // a − b = 1: S(α) → 1/Γ(m)^b as α → 0.
        assert!((p.log_unnormalized_density(1e-300).unwrap() - 0.5f64.ln()).abs() < 1e-12);
        let p = sg(3.0, 2.0, 3);
        assert!((p.log_unnormalized_density(2.0).unwrap() - (4.0f64 / 576.0).ln()).abs() < 1e-14);
        assert!(p.log_unnormalized_density(0.0).is_err());
    }

    #[test]
    fn normalizing_constants_match_antiderivatives() {
        let ln2 = std::f64::consts::LN_2;
        let cases = [
            (sg(2.0, 1.0, 3), ln2),
            (sg(3.0, 2.0, 3), 1.5 - 2.0 * ln2),
            (sg(4.0, 2.0, 3), 3.0 * ln2 - 2.0),
        ];
        for (p, want) in cases {
            let got = p.log_norm_const().unwrap().exp();
            assert!(((got - want) / want).abs() < 1e-10, "{p}: {got} vs {want}");
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        let d = sg(5.0, 1.0, 100).normalized().unwrap();
        let total = log_integral(|x| d.log_pdf(x).unwrap(), QuadratureConfig::default()).unwrap();
        assert!(total.abs() < 1e-6);
        let p = sg(2.0, 1.0, 3);
        let want = (1.0f64 / 6.0).ln() - std::f64::consts::LN_2.ln();
        assert!((p.log_pdf(1.0).unwrap() - want).abs() < 1e-10);
        // Pole at zero when a − b < 1.
        let p = sg(0.6, 0.2, 149).normalized().unwrap();
        assert!(p.log_pdf(1e-200).unwrap() > p.log_pdf(1e-100).unwrap());
        assert!(p.log_pdf(1e-100).unwrap() > p.log_pdf(1e-10).unwrap());
    }

    #[test]
    fn moments() {
        let ln2 = std::f64::consts::LN_2;
        let m = sg(3.0, 2.0, 3).moment(1.0).unwrap().value();
        let want = (3.0 * ln2 - 2.0) / (1.5 - 2.0 * ln2);
        assert!((m - want).abs() < 1e-9);
        assert!((want - 0.698659).abs() < 1e-6);
        assert_eq!(
            sg(2.0, 1.0, 3).moment(1.0).unwrap(),
            Moment::Infinite { boundary: true }
        );
        assert_eq!(
            sg(2.0, 1.0, 3).moment(1.5).unwrap(),
            Moment::Infinite { boundary: false }
        );
        assert!(sg(2.0, 1.0, 3).moment(0.0).is_err());
    }

    #[test]
    fn gamma_limit_parameters() {
        let g = sg(5.0, 1.0, 100).gamma_limit().unwrap();
        assert_eq!(g.shape, 4.0);
        assert!((g.rate - 100f64.ln()).abs() < 1e-15);
        let g = sg(5.0, 2.0, 100).gamma_limit().unwrap();
        assert_eq!(g.shape, 3.0);
        assert!((g.rate - 2.0 * 100f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn cdf_and_survival_add_to_one() {
        let d = sg(5.0, 1.0, 100).normalized().unwrap();
        for &x in &[0.1, 0.7, 2.0, 10.0, 100.0] {
            let c = d.log_cdf(x).unwrap().exp();
            let s = d.log_survival(x).unwrap().exp();
            assert!((c + s - 1.0).abs() < 1e-9, "x={x}: {c} + {s}");
        }
    }

    #[test]
    fn gamma_pdf_integrates() {
        let g = GammaParams::new(2.5, 3.0).unwrap();
        let total = log_integral(|x| g.log_pdf(x), QuadratureConfig::default()).unwrap();
        assert!(total.abs() < 1e-10);
        assert!((g.cdf(1e6) - 1.0).abs() < 1e-15);
        assert!(GammaParams::new(0.0, 1.0).is_err());
    }
}

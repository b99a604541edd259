use stirling_gamma::dpm::PrecisionPrior;
use stirling_gamma::sbm::SbmPrior;
use stirling_gamma::{Error, StirlingGammaParams};

use crate::error::{CliError, CliResult};

/// A parsed `kind:values` prior string.
#[derive(Clone, Debug, PartialEq)]
struct PriorArg {
    kind: String,
    values: Vec<f64>,
}

fn parse_arg(s: &str) -> CliResult<PriorArg> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("prior {s:?} must look like kind:values")))?;
    let values = rest
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("prior {s:?}: {t:?} is not a number")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(PriorArg {
        kind: kind.trim().to_ascii_lowercase(),
        values,
    })
}

/// Sg(a, b, n) from `a,b` or `a,b,m`; an explicit m must equal n.
fn conjugate_params(arg: &PriorArg, n: usize) -> CliResult<StirlingGammaParams> {
    let (a, b) = match arg.values.as_slice() {
        [a, b] => (*a, *b),
        [a, b, m] => {
            if *m != n as f64 {
                return Err(Error::Conjugacy {
                    m: *m as u64,
                    n: n as u64,
                }
                .into());
            }
            (*a, *b)
        }
        _ => {
            return Err(CliError::Usage(format!(
                "{} prior takes a,b or a,b,m",
                arg.kind
            )))
        }
    };
    Ok(StirlingGammaParams::new(a, b, n as u64)?)
}

fn fixed_alpha(arg: &PriorArg) -> CliResult<f64> {
    match arg.values.as_slice() {
        [alpha] => Ok(*alpha),
        _ => Err(CliError::Usage("fixed prior takes one value".into())),
    }
}

/// `fixed:<alpha>` or `sg:<a>,<b>[,<m>]` for a mixture of n points.
pub fn parse_mixture_prior(s: &str, n: usize) -> CliResult<PrecisionPrior> {
    let arg = parse_arg(s)?;
    match arg.kind.as_str() {
        "fixed" => Ok(PrecisionPrior::fixed(fixed_alpha(&arg)?)?),
        "sg" => Ok(PrecisionPrior::StirlingGamma {
            params: conjugate_params(&arg, n)?,
        }),
        k => Err(CliError::Usage(format!(
            "unknown mixture prior {k:?}; use fixed or sg"
        ))),
    }
}

/// `fixed:`, `independent:` or `pooled:` for networks on n nodes.
pub fn parse_sbm_prior(s: &str, n: usize) -> CliResult<SbmPrior> {
    let arg = parse_arg(s)?;
    match arg.kind.as_str() {
        "fixed" => {
            let alpha = fixed_alpha(&arg)?;
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(
                    Error::Parameter(format!("fixed α must be positive, got {alpha}")).into(),
                );
            }
            Ok(SbmPrior::Fixed { alpha })
        }
        "independent" => Ok(SbmPrior::Independent {
            params: conjugate_params(&arg, n)?,
        }),
        "pooled" => Ok(SbmPrior::Pooled {
            params: conjugate_params(&arg, n)?,
        }),
        k => Err(CliError::Usage(format!(
            "unknown network prior {k:?}; use fixed, independent or pooled"
        ))),
    }
}

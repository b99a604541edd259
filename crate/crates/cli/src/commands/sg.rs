use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use stirling_gamma::conjugacy::prior_elicit;
use stirling_gamma::special::ln_gamma;
use stirling_gamma::{Moment, SamplerKind, StirlingGammaParams, StirlingGammaSampler};

use crate::args::{ElicitArgs, PdfArgs, SgCommand, SgParams, SgSampleArgs};
use crate::error::{CliError, CliResult};
use crate::io::{Output, Table};

pub fn run(cmd: &SgCommand, out: &Output) -> CliResult<()> {
    match cmd {
        SgCommand::Pdf(a) => pdf(a, out),
        SgCommand::Sample(a) => sample(a, out),
        SgCommand::Moments(a) => moments(&a.params, out),
        SgCommand::Elicit(a) => elicit(a),
    }
}

fn params(p: &SgParams) -> CliResult<StirlingGammaParams> {
    Ok(StirlingGammaParams::new(p.a, p.b, p.m)?)
}

/// Density at α = 0, where the kernel behaves like α^{a−b−1} / Γ(m)^b.
fn density_at_zero(p: &StirlingGammaParams, ln_s: f64) -> f64 {
    let e = p.a() - p.b() - 1.0;
    if e > 0.0 {
        0.0
    } else if e == 0.0 {
        (-p.b() * ln_gamma(p.m() as f64) - ln_s).exp()
    } else {
        f64::INFINITY
    }
}

fn pdf(args: &PdfArgs, out: &Output) -> CliResult<()> {
    let p = params(&args.params)?;
    if args.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let d = p.normalized()?;
    let upper = match args.upper {
        Some(u) if u > 0.0 && u.is_finite() => u,
        Some(u) => {
            return Err(CliError::Usage(format!(
                "--upper must be positive, got {u}"
            )))
        }
        None => {
            let target = (1e-12f64).ln();
            let mut x = 2.0 * p.location();
            while d.log_survival(x)? > target && x < 1e300 {
                x *= 2.0;
            }
            x
        }
    };
    let h = upper / (args.points - 1) as f64;
    let mut t = Table::new(&["alpha", "density"]);
    let mut integral = 0.0;
    let mut prev = 0.0;
    for i in 0..args.points {
        let x = if i + 1 == args.points {
            upper
        } else {
            i as f64 * h
        };
        let f = if i == 0 {
            density_at_zero(&p, d.log_norm_const())
        } else {
            d.log_pdf(x)?.exp()
        };
        if i > 0 {
            integral += 0.5 * h * (prev + f);
        }
        prev = f;
        t.row(&[x, f]);
    }
    let path = out.write("pdf.csv", &t.finish())?;
    out!(
        "{}",
        json!({
            "file": path,
            "points": args.points,
            "upper": upper,
            "log_normalizing_constant": d.log_norm_const(),
            "trapezoid_integral": integral,
        })
    );
    Ok(())
}

fn sample(args: &SgSampleArgs, out: &Output) -> CliResult<()> {
    let p = params(&args.params)?;
    let smp = StirlingGammaSampler::new(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut t = Table::headerless();
    let mut proposals = 0u64;
    let mut sum = 0.0;
    for _ in 0..args.count {
        let (x, tries) = smp.sample_counted(&mut rng)?;
        proposals += tries;
        sum += x;
        t.row(&[x]);
    }
    let path = out.write("samples.csv", &t.finish())?;
    let method = match smp.kind() {
        SamplerKind::RatioOfUniforms => "ratio-of-uniforms",
        SamplerKind::BetaPrime => "beta-prime",
    };
    out!(
        "{}",
        json!({
            "file": path,
            "count": args.count,
            "proposals": proposals,
            "acceptance_rate": args.count as f64 / proposals.max(1) as f64,
            "theoretical_acceptance": smp.acceptance_probability()?,
            "method": method,
            "sample_mean": sum / args.count.max(1) as f64,
        })
    );
    Ok(())
}

fn moment_json(m: Moment) -> serde_json::Value {
    match m {
        Moment::Finite(v) => json!({ "value": v, "infinite": false }),
        Moment::Infinite { boundary } => {
            json!({ "value": null, "infinite": true, "boundary": boundary })
        }
    }
}

fn moments(args: &SgParams, out: &Output) -> CliResult<()> {
    let p = params(args)?;
    let m1 = p.moment(1.0)?;
    let m2 = p.moment(2.0)?;
    let variance = match (m1, m2) {
        (Moment::Finite(a), Moment::Finite(b)) => Some(b - a * a),
        _ => None,
    };
    let v = json!({
        "a": p.a(),
        "b": p.b(),
        "m": p.m(),
        "mean": moment_json(m1),
        "second_moment": moment_json(m2),
        "variance": variance,
    });
    out.write_json("moments.json", &v)?;
    out!("{v}");
    Ok(())
}

/// Up to 12 significant digits, trailing zeros dropped.
fn readable(x: f64) -> String {
    let s = format!("{:.*e}", 11, x);
    let v: f64 = s.parse().unwrap();
    format!("{v}")
}

fn elicit(args: &ElicitArgs) -> CliResult<()> {
    let p = prior_elicit(args.ek, args.b, args.n)?;
    out!("Sg({}, {}, {})", readable(p.a()), readable(p.b()), p.m());
    out!("{}", json!({ "a": p.a(), "b": p.b(), "m": p.m() }));
    Ok(())
}
